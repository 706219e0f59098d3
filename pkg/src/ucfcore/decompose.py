"""Eta-threshold computation for every vertex and every k.

Three construction strategies share the same contract (identical thresholds):

* ``peel_baseline`` recomputes neighbor k-probabilities by full DP after every
  deletion.
* ``peel_optiucf`` adds lazy refreshing (skip on upper bound, delay on lower
  bound) and, when fed the previous iteration's thresholds, vertex layering
  with progressive refinement.
* ``peel_ec`` is the division-based reference mode whose thresholds are
  knowingly wrong; it exists so the error can be measured.

A fourth mode, "op", is ``peel_optiucf`` without layering.

All priority structures are binary heaps with lazy deletion: an entry is a
(key, vertex) pair and counts as stale whenever its key no longer matches the
vertex's authoritative key array (or the vertex left the pool).  Duplicate
live entries are harmless because every pop re-validates.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Mapping

from .graph import UncertainGraph, k_core, k_max
from .kprob import beta_tail, ec_remove_edge, kprob_dp, kprob_value

# Virtual vertex returned when the definite pool is empty: its key exceeds
# any real k-probability, so every lower bound and layer threshold beats it.
SENTINEL = (2.0, -1)


class AuditError(AssertionError):
    """Shadow-DP audit found an indefinite vertex below the deleted minimum."""


@dataclass
class PeelStats:
    k: int
    algo: str
    refreshes: int = 0
    deletions: int = 0
    wall_ms: float = 0.0

    def report_line(self) -> str:
        return (
            f"k={self.k} algo={self.algo} refreshes={self.refreshes} "
            f"deletions={self.deletions} wall_ms={self.wall_ms:.3f}"
        )


@dataclass
class PeelResult:
    """Outcome of one k iteration."""

    k: int
    thresholds: dict[int, float]
    stack: list[tuple[int, float]]
    stats: PeelStats
    first_kprobs: dict[int, float] = field(default_factory=dict)


def count_refreshes(run) -> int:
    """Number of full DP k-probability computations in a peel run or a set of them."""
    if isinstance(run, PeelResult):
        return run.stats.refreshes
    if isinstance(run, PeelStats):
        return run.refreshes
    if isinstance(run, Mapping):
        return sum(count_refreshes(r) for r in run.values())
    return sum(count_refreshes(r) for r in run)


def peel_baseline(g: UncertainGraph, k: int) -> PeelResult:
    """One k iteration of the always-recompute algorithm.

    The graph must be reset (fully alive).  Vertices whose degree has dropped
    below k already hold k-probability 0 and are skipped on later refreshes:
    deletions can never raise a k-probability, so zero is absorbing.
    """
    stats = PeelStats(k=k, algo="bc")
    core = k_core(g, k)
    g.restrict_to(core)
    thresholds: dict[int, float] = {}
    stack: list[tuple[int, float]] = []
    first: dict[int, float] = {}
    kp = [0.0] * g.n
    alive = g.alive
    adj = g.adj
    heap: list[tuple[float, int]] = []
    for u in sorted(core):
        v = kprob_value([p for w, p in adj[u] if alive[w]], k)
        stats.refreshes += 1
        kp[u] = v
        first[u] = v
        heap.append((v, u))
    heapq.heapify(heap)

    cur = 0.0
    target = len(core)
    while stats.deletions < target:
        while True:
            v, u = heapq.heappop(heap)
            if alive[u] and v == kp[u]:
                break
        if v > cur:
            cur = v
        thresholds[u] = cur
        stack.append((u, cur))
        stats.deletions += 1
        for w in g.delete_vertex(u):
            if kp[w] > 0.0:
                nv = kprob_value([p for x, p in adj[w] if alive[x]], k)
                stats.refreshes += 1
                kp[w] = nv
                heapq.heappush(heap, (nv, w))
    return PeelResult(k, thresholds, stack, stats, first)


def peel_ec(g: UncertainGraph, k: int) -> PeelResult:
    """One k iteration updating neighbors by the division rule.

    Initial k-probabilities come from full DP; every subsequent neighbor
    update divides by (1 - p_e).  Values are recorded as computed, negative
    or above one included, since this mode exists to measure that error.
    """
    stats = PeelStats(k=k, algo="ec")
    core = k_core(g, k)
    g.restrict_to(core)
    thresholds: dict[int, float] = {}
    stack: list[tuple[int, float]] = []
    first: dict[int, float] = {}
    kp = [0.0] * g.n
    dists = {}
    heap: list[tuple[float, int]] = []
    for u in sorted(core):
        v, dist = kprob_dp(g.incident_probs(u), k)
        stats.refreshes += 1
        kp[u] = v
        dists[u] = dist
        first[u] = v
        heap.append((v, u))
    heapq.heapify(heap)

    cur = 0.0
    target = len(core)
    while stats.deletions < target:
        while True:
            v, u = heapq.heappop(heap)
            if g.alive[u] and v == kp[u]:
                break
        if v > cur:
            cur = v
        thresholds[u] = cur
        stack.append((u, cur))
        stats.deletions += 1
        pairs = [(w, p) for w, p in g.adj[u] if g.alive[w]]
        g.delete_vertex(u)
        for w, p_e in pairs:
            nv, dists[w] = ec_remove_edge(dists[w], kp[w], p_e)
            if nv != nv:  # NaN would break both ordering and staleness checks
                nv = float("-inf")
            kp[w] = nv
            heapq.heappush(heap, (nv, w))
    return PeelResult(k, thresholds, stack, stats, first)


def partition_vertices(core_vertices, prev_thresholds: Mapping[int, float]):
    """Split the k-core by the completed (k+1)-iteration thresholds.

    Returns (pt, layers, lambdas): ``pt`` holds core vertices without a
    (k+1) threshold, ``lambdas`` the distinct previous thresholds ascending,
    and ``layers[i]`` the vertices whose previous threshold is lambdas[i].
    """
    buckets: dict[float, list[int]] = {}
    pt: list[int] = []
    for u in sorted(core_vertices):
        t = prev_thresholds.get(u)
        if t is None:
            pt.append(u)
        else:
            buckets.setdefault(t, []).append(u)
    lambdas = sorted(buckets)
    return pt, [buckets[t] for t in lambdas], lambdas


class PeelState:
    """Working state of one optimized k iteration.

    Alive vertices sit in exactly one of three pools: a layer that has not
    been added yet, the definite part of the working set (min-heap keyed by
    current k-probability, ties to the smaller id), or the indefinite heap D
    (min-heap keyed by lower bound).  D is a subset of the working set.
    """

    def __init__(
        self,
        g: UncertainGraph,
        k: int,
        pt,
        layers,
        lambdas,
        lower: str = "both",
        stats: PeelStats | None = None,
    ):
        self.g = g
        self.k = k
        self.layers = layers
        self.lambdas = lambdas
        self.cursor = 0
        self.stats = stats or PeelStats(k=k, algo="opstar")
        self.lower = lower
        n = g.n
        self.defkey = [0.0] * n
        self.lb = [0.0] * n
        self.in_vw = [False] * n
        self.in_d = [False] * n
        self.tail = [-1] * n  # creeping last-alive index per adjacency list
        self.def_heap: list[tuple[float, int]] = []
        self.d_heap: list[tuple[float, int]] = []
        self.vw_count = 0
        self.cur_thres = 0.0
        self.thresholds: dict[int, float] = {}
        self.stack: list[tuple[int, float]] = []
        self.first_kprobs: dict[int, float] = {}
        for u in pt:
            self._enter_definite(u, self._compute(u))

    # -- plumbing ----------------------------------------------------------

    def _compute(self, u: int) -> float:
        """Fresh DP k-probability of u over its alive incident edges."""
        g = self.g
        lst = g.adj[u]
        t = self.tail[u]
        if t >= 0:
            lst = lst[: t + 1]  # everything past the tail pointer is dead
        alive = g.alive
        v = kprob_value([p for w, p in lst if alive[w]], self.k)
        self.stats.refreshes += 1
        self.first_kprobs.setdefault(u, v)
        return v

    def _enter_definite(self, u: int, key: float) -> None:
        if not self.in_vw[u]:
            self.in_vw[u] = True
            self.vw_count += 1
        self.in_d[u] = False
        self.defkey[u] = key
        heapq.heappush(self.def_heap, (key, u))

    def _peek_definite(self):
        heap = self.def_heap
        alive = self.g.alive
        in_vw = self.in_vw
        in_d = self.in_d
        defkey = self.defkey
        while heap:
            key, u = heap[0]
            if alive[u] and in_vw[u] and not in_d[u] and key == defkey[u]:
                return key, u
            heapq.heappop(heap)
        return None

    def _peek_indefinite(self):
        heap = self.d_heap
        alive = self.g.alive
        in_d = self.in_d
        lbs = self.lb
        while heap:
            key, u = heap[0]
            if alive[u] and in_d[u] and key == lbs[u]:
                return key, u
            heapq.heappop(heap)
        return None

    def indefinite_vertices(self) -> list[int]:
        return [u for u in range(self.g.n) if self.in_d[u] and self.g.alive[u]]

    # -- the operations of one peel step ------------------------------------

    def select_definite(self):
        """Argmin k-probability over definite working-set vertices, or the sentinel."""
        top = self._peek_definite()
        return SENTINEL if top is None else top

    def refresh_indefinites(self, p_nxt):
        """Recompute indefinite vertices whose lower bound undercuts the candidate.

        Pops D by ascending lower bound; stops at the first vertex whose bound
        is not below the running candidate's k-probability (it stays in D,
        still indefinite).  Each recomputed vertex becomes definite and takes
        over the candidate slot if its fresh value is smaller.  Returns the
        final candidate.
        """
        while True:
            top = self._peek_indefinite()
            if top is None or top[0] >= p_nxt[0]:
                return p_nxt
            heapq.heappop(self.d_heap)
            u = top[1]
            v = self._compute(u)
            self._enter_definite(u, v)
            if (v, u) < p_nxt:
                p_nxt = (v, u)

    def add_layer(self, p_crt):
        """Move the next layer into the working set, refining the candidate."""
        if self.cursor >= len(self.layers):
            raise ValueError("no layer left to add")
        layer = self.layers[self.cursor]
        self.cursor += 1
        for u in layer:
            v = self._compute(u)
            self._enter_definite(u, v)
            if (v, u) < p_crt:
                p_crt = (v, u)
        return p_crt

    def delete_current(self, cand, audit: bool = False) -> None:
        """Record the candidate's threshold, delete it, and lay neighbor bounds.

        Working-set neighbors whose degree fell below k or whose upper bound
        is at most the running threshold get definite key 0: they become the
        next minima and inherit the running threshold.  Every other touched
        working-set neighbor re-enters D keyed by a lower bound over its
        current alive incident list (superseding any earlier D entry).
        Neighbors still inside un-added layers are left alone; their layer
        threshold is their lower bound.
        """
        key, u = cand
        if audit:
            self._audit(key)
        if key > self.cur_thres:
            self.cur_thres = key
        self.thresholds[u] = self.cur_thres
        self.stack.append((u, self.cur_thres))
        self.stats.deletions += 1
        self.in_vw[u] = False
        self.vw_count -= 1

        g = self.g
        k = self.k
        cur = self.cur_thres
        mode = self.lower
        alive = g.alive
        adj = g.adj
        live_deg = g.live_deg
        in_vw = self.in_vw
        in_d = self.in_d
        defkey = self.defkey
        lbs = self.lb
        tail = self.tail
        d_heap = self.d_heap
        def_heap = self.def_heap
        for w in g.delete_vertex(u):
            if not in_vw[w]:
                continue
            if defkey[w] == 0.0 and not in_d[w]:
                continue  # already zeroed, nothing can raise it
            deg = live_deg[w]
            if deg < k:
                defkey[w] = 0.0
                in_d[w] = False
                heapq.heappush(def_heap, (0.0, w))
                continue
            # Lay bounds over the alive incident list, reading only what they
            # need: the k largest alive probabilities and the smallest one
            # (via a pointer that remembers how far the dead tail has crept).
            lst = adj[w]
            t = tail[w]
            if t < 0:
                t = len(lst) - 1
            while not alive[lst[t][0]]:
                t -= 1
            tail[w] = t
            p_min = lst[t][1]
            ub = None
            if deg == k:
                probs = [p for v, p in lst[: t + 1] if alive[v]]
                p_max = probs[0]
                if p_max == p_min:
                    lb = ub = kprob_value(probs, k)  # uniform: bounds collapse
                elif mode == "beta":
                    lb = beta_tail(p_min, k, deg)
                else:
                    # All edges must be present: the top-k term is the value
                    # itself and dominates the tail at p_min.
                    lb = kprob_value(probs, k)
            else:
                prod = 1.0
                left = k
                p_max = -1.0
                for v, p in lst:
                    if alive[v]:
                        if p_max < 0.0:
                            p_max = p
                        prod *= p
                        left -= 1
                        if left == 0:
                            break
                if p_max == p_min:
                    lb = ub = kprob_value([p_max] * deg, k)
                elif mode == "beta":
                    lb = beta_tail(p_min, k, deg)
                else:
                    lb = prod
                    if mode == "both" and not (
                        deg <= 200 and math.comb(deg, k) * p_min**k <= prod
                    ):
                        beta = beta_tail(p_min, k, deg)
                        if beta > lb:
                            lb = beta
            if lb <= cur:
                # A lower bound above the running threshold certifies the
                # upper bound is above it too; only here is the p_max tail
                # actually needed.
                if ub is None:
                    ub = beta_tail(p_max, k, deg)
                if ub <= cur:
                    defkey[w] = 0.0
                    in_d[w] = False
                    heapq.heappush(def_heap, (0.0, w))
                    continue
            lbs[w] = lb
            in_d[w] = True
            heapq.heappush(d_heap, (lb, w))

    def _audit(self, deleted_key: float) -> None:
        # Vertices parked in D must never actually undercut the deleted minimum.
        for u in self.indefinite_vertices():
            truth = kprob_value(self.g.incident_probs(u), self.k)
            if truth < deleted_key - 1e-12:
                raise AuditError(
                    f"k={self.k}: indefinite vertex {u} has k-probability "
                    f"{truth} below deleted minimum {deleted_key}"
                )


def peel_optiucf(
    g: UncertainGraph,
    k: int,
    prev_thresholds: Mapping[int, float] | None = None,
    lower: str = "both",
    audit: bool = False,
    algo: str = "opstar",
) -> PeelResult:
    """One k iteration with lazy refreshing and (optionally) layering.

    ``prev_thresholds`` is the completed (k+1) slice; pass an empty mapping at
    k = k_max.  ``None`` disables partitioning entirely (the "op" mode): all
    core vertices are initialized up front exactly like the baseline.
    """
    stats = PeelStats(k=k, algo=algo)
    core = k_core(g, k)
    g.restrict_to(core)
    if prev_thresholds:
        pt, layers, lambdas = partition_vertices(core, prev_thresholds)
    else:
        pt, layers, lambdas = sorted(core), [], []
    state = PeelState(g, k, pt, layers, lambdas, lower, stats)
    l = len(lambdas)

    while stats.deletions < len(core):
        cand = state.select_definite()
        d_top = state._peek_indefinite()
        if d_top is not None and d_top[0] < cand[0]:
            cand = state.refresh_indefinites(cand)
        while state.cursor < l and state.lambdas[state.cursor] < cand[0]:
            cand = state.add_layer(cand)
        assert cand is not SENTINEL
        state.delete_current(cand, audit=audit)
        if state.vw_count == 0 and state.cursor < l:
            state.add_layer(SENTINEL)
    return PeelResult(k, state.thresholds, state.stack, stats, state.first_kprobs)


_LOWER_CODES = {"both": 0, "topk": 1, "beta": 2}


def _result_from_arrays(g, k, algo, order, thres, first, refreshes) -> PeelResult:
    stats = PeelStats(k=k, algo=algo, refreshes=int(refreshes), deletions=len(order))
    thresholds = {}
    stack = []
    for i in range(len(order)):
        u = int(order[i])
        t = float(thres[i])
        thresholds[u] = t
        stack.append((u, t))
    firsts = {u: float(first[u]) for u in thresholds if first[u] >= 0.0}
    return PeelResult(k, thresholds, stack, stats, firsts)


def _peel_bc_fast(g: UncertainGraph, k: int) -> PeelResult:
    import numpy as np

    from . import _kernels

    indptr, nbrs, probs = g.csr()
    core = k_core(g, k)
    mask = np.zeros(g.n, dtype=np.bool_)
    for u in core:
        mask[u] = True
    order, thres, first, refreshes = _kernels.peel_bc(indptr, nbrs, probs, mask, k)
    return _result_from_arrays(g, k, "bc", order, thres, first, refreshes)


def _peel_opstar_fast(
    g: UncertainGraph, k: int, prev_thresholds, lower: str
) -> PeelResult:
    import numpy as np

    from . import _kernels

    indptr, nbrs, probs = g.csr()
    core = k_core(g, k)
    mask = np.zeros(g.n, dtype=np.bool_)
    for u in core:
        mask[u] = True
    if prev_thresholds:
        pt, layers, lambdas = partition_vertices(core, prev_thresholds)
    else:
        pt, layers, lambdas = sorted(core), [], []
    pt_arr = np.asarray(pt, dtype=np.int64)
    layer_indptr = np.zeros(len(layers) + 1, dtype=np.int64)
    for i, layer in enumerate(layers):
        layer_indptr[i + 1] = layer_indptr[i] + len(layer)
    layer_verts = np.asarray(
        [u for layer in layers for u in layer] or [0], dtype=np.int64
    )[: layer_indptr[-1]]
    lam = np.asarray(lambdas, dtype=np.float64)
    order, thres, first, refreshes = _kernels.peel_opstar(
        indptr, nbrs, probs, mask, k, pt_arr, layer_indptr, layer_verts, lam,
        _LOWER_CODES[lower],
    )
    algo = "opstar" if prev_thresholds is not None else "op"
    return _result_from_arrays(g, k, algo, order, thres, first, refreshes)


def _have_fast() -> bool:
    try:
        from . import _kernels

        return _kernels.HAVE_NUMBA
    except ImportError:  # pragma: no cover
        return False


def _select_peeler(algo: str, audit: bool, engine: str):
    # Audit instruments the Python peelers; it always wins over the kernels.
    fast = not audit and (engine == "fast" or (engine == "auto" and _have_fast()))
    if algo == "bc":
        if fast:
            return lambda g, k, prev, lower, audit: _peel_bc_fast(g, k)
        return lambda g, k, prev, lower, audit: peel_baseline(g, k)
    if algo == "ec":
        return lambda g, k, prev, lower, audit: peel_ec(g, k)
    if algo == "op":
        if fast:
            return lambda g, k, prev, lower, audit: _peel_opstar_fast(
                g, k, None, lower
            )
        return lambda g, k, prev, lower, audit: peel_optiucf(
            g, k, None, lower, audit, algo="op"
        )
    if algo == "opstar":
        if fast:
            return lambda g, k, prev, lower, audit: _peel_opstar_fast(
                g, k, prev, lower
            )
        return lambda g, k, prev, lower, audit: peel_optiucf(
            g, k, prev, lower, audit, algo="opstar"
        )
    raise ValueError(f"unknown algorithm {algo!r}")


def decompose(
    g: UncertainGraph,
    algo: str = "opstar",
    lower: str = "both",
    audit: bool = False,
    engine: str = "auto",
) -> dict[int, PeelResult]:
    """Peel every k from k_max down to 1; returns the per-k results.

    Wall time per k brackets the peel only (k-core included, parsing and
    serialization excluded).  The graph is left reset.  ``engine`` selects
    "auto" (compiled kernels for bc/op/opstar when numba is importable),
    "fast", or "python"; audit mode always runs the Python peelers.
    """
    peeler = _select_peeler(algo, audit, engine)
    if not audit and engine != "python" and _have_fast():
        from . import _kernels

        _kernels.warmup()  # JIT load stays out of the per-k timers
    results: dict[int, PeelResult] = {}
    prev: dict[int, float] = {}
    for k in range(k_max(g), 0, -1):
        g.reset()
        t0 = time.perf_counter()
        res = peeler(g, k, prev, lower, audit)
        res.stats.wall_ms = (time.perf_counter() - t0) * 1000.0
        results[k] = res
        prev = res.thresholds
    g.reset()
    return results
