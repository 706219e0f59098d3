"""Ground-truth engines: explicit possible-world enumeration for
k-probabilities and a recompute-only (k, eta)-core search.

Both are deliberately simple and independent of the indexed algorithms; they
exist to be trusted, not to be fast.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .graph import CoreResult, UncertainGraph
from .kprob import kprob_value

MAX_ENUM_EDGES = 20


def world_probabilities(incident_probs) -> np.ndarray:
    """Probability of every edge subset, indexed by bitmask (bit j = edge j present).

    The entries sum to 1 up to roundoff: they enumerate all 2^d worlds.
    """
    d = len(incident_probs)
    if d > MAX_ENUM_EDGES:
        raise ValueError(f"enumeration limited to {MAX_ENUM_EDGES} edges, got {d}")
    masks = np.arange(1 << d, dtype=np.int64)
    out = np.ones(1 << d, dtype=np.float64)
    for j, p in enumerate(incident_probs):
        present = (masks >> j) & 1
        out *= np.where(present == 1, p, 1.0 - p)
    return out


def enumerate_kprob(incident_probs, k: int) -> float:
    """Pr(deg >= k) by summing Pr(world) over worlds with >= k incident edges."""
    if k <= 0:
        return 1.0
    d = len(incident_probs)
    if d < k:
        return 0.0
    w = world_probabilities(incident_probs)
    masks = np.arange(1 << d, dtype=np.int64)
    counts = np.zeros(1 << d, dtype=np.int64)
    for j in range(d):
        counts += (masks >> j) & 1
    return math.fsum(w[counts >= k])


def direct_core(g: UncertainGraph, k: int, eta: float, order=None) -> CoreResult:
    """(k, eta)-cores by brute peeling: delete any vertex whose current
    k-probability is below eta (or degree below k) until fixpoint, then split
    the survivors into connected components.

    Every check recomputes the k-probability from scratch over the vertex's
    surviving incident edges; no bounds, no index, no reuse.  The result does
    not depend on the deletion order (``order`` only seeds the worklist, for
    order-independence tests).  The graph itself is never mutated.
    """
    alive = [True] * g.n
    deg = [len(g.adj[u]) for u in range(g.n)]
    queue = deque(order if order is not None else range(g.n))
    queued = [True] * g.n
    while queue:
        u = queue.popleft()
        queued[u] = False
        if not alive[u]:
            continue
        if deg[u] < k or kprob_value([p for v, p in g.adj[u] if alive[v]], k) < eta:
            alive[u] = False
            for v, _ in g.adj[u]:
                if alive[v]:
                    deg[v] -= 1
                    if not queued[v]:
                        queued[v] = True
                        queue.append(v)

    survivors = {u for u in range(g.n) if alive[u]}
    comps: list[set[int]] = []
    seen: set[int] = set()
    for s in sorted(survivors):
        if s in seen:
            continue
        comp = {s}
        seen.add(s)
        stack = [s]
        while stack:
            u = stack.pop()
            for v, _ in g.adj[u]:
                if v in survivors and v not in seen:
                    seen.add(v)
                    comp.add(v)
                    stack.append(v)
        comps.append(comp)
    return CoreResult(comps, k, eta)
