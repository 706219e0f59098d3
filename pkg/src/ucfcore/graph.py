"""Uncertain-graph data model: ingestion, deterministic k-core, soft deletion."""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass
from typing import Iterable


class GraphParseError(ValueError):
    """Malformed edge-list input; the message carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class CoreResult:
    """Disjoint connected vertex sets, each one a (k, eta)-core."""

    components: list[set[int]]
    k: int
    eta: float

    def vertex_union(self) -> set[int]:
        out: set[int] = set()
        for c in self.components:
            out |= c
        return out


class UncertainGraph:
    """Undirected simple graph whose edges carry existence probabilities.

    Vertices are dense internal ids 0..n-1; ``labels`` maps them back to the
    ids used in the source file.  Each adjacency list is sorted by probability
    non-increasing (ties: neighbor id ascending), which fixes the fold order of
    every probability computation downstream.  Deletion is soft: ``alive``
    flags plus live-degree counters, so a single loaded graph serves any number
    of peeling passes via :meth:`reset`.

    All mutation (ingest, delete, reset) must happen on one thread; a graph
    that is not being mutated is safe for concurrent reads.
    """

    def __init__(self) -> None:
        self.n = 0
        self.labels: list[int] = []
        self.edges: list[tuple[int, int, float]] = []
        self.adj: list[list[tuple[int, float]]] = []
        self.alive: list[bool] = []
        self.live_deg: list[int] = []
        self.full_deg: list[int] = []
        self.dropped_edges = 0

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int, float]],
        n: int | None = None,
        labels: list[int] | None = None,
    ) -> "UncertainGraph":
        """Build directly from (u, v, p) triples over dense ids."""
        g = cls()
        edges = list(edges)
        top = max((max(u, v) for u, v, _ in edges), default=-1) + 1
        g.n = max(top, n or 0)
        g.labels = labels if labels is not None else list(range(g.n))
        g.adj = [[] for _ in range(g.n)]
        for u, v, p in edges:
            a, b = (u, v) if u < v else (v, u)
            g.edges.append((a, b, p))
            g.adj[a].append((b, p))
            g.adj[b].append((a, p))
        g._finalize()
        return g

    def _finalize(self) -> None:
        for lst in self.adj:
            lst.sort(key=lambda e: (-e[1], e[0]))
        self.full_deg = [len(lst) for lst in self.adj]
        self.alive = [True] * self.n
        self.live_deg = self.full_deg.copy()
        self._csr = None

    def csr(self):
        """Adjacency as (indptr, neighbors, probs) arrays, in adjacency order.

        Built lazily and cached; the graph topology is immutable after load,
        so the cache never invalidates.
        """
        if self._csr is None:
            import numpy as np

            indptr = np.zeros(self.n + 1, dtype=np.int64)
            for u in range(self.n):
                indptr[u + 1] = indptr[u] + len(self.adj[u])
            nbrs = np.empty(indptr[-1], dtype=np.int64)
            probs = np.empty(indptr[-1], dtype=np.float64)
            pos = 0
            for u in range(self.n):
                for v, p in self.adj[u]:
                    nbrs[pos] = v
                    probs[pos] = p
                    pos += 1
            self._csr = (indptr, nbrs, probs)
        return self._csr

    # -- state -------------------------------------------------------------

    def reset(self) -> None:
        """Bring every vertex back to life."""
        for u in range(self.n):
            self.alive[u] = True
        self.live_deg = self.full_deg.copy()

    def restrict_to(self, keep: set[int]) -> None:
        """Mark every vertex outside ``keep`` dead and fix live degrees."""
        for u in range(self.n):
            self.alive[u] = u in keep
        for u in range(self.n):
            if self.alive[u]:
                self.live_deg[u] = sum(1 for v, _ in self.adj[u] if self.alive[v])
            else:
                self.live_deg[u] = 0

    def degree(self, u: int) -> int:
        return self.live_deg[u]

    def incident_probs(self, u: int) -> list[float]:
        """Probabilities of u's alive incident edges, non-increasing."""
        alive = self.alive
        return [p for v, p in self.adj[u] if alive[v]]

    def delete_vertex(self, u: int) -> list[int]:
        """Soft-delete an alive vertex; returns its alive neighbors in adjacency order."""
        if not self.alive[u]:
            raise ValueError(f"vertex {u} is already deleted")
        self.alive[u] = False
        self.live_deg[u] = 0
        affected = []
        for v, _ in self.adj[u]:
            if self.alive[v]:
                self.live_deg[v] -= 1
                affected.append(v)
        return affected

    def induced_subgraph(self, vertices: Iterable[int]) -> "UncertainGraph":
        """New graph over the given vertices and the edges among them.

        Isolated sampled vertices are kept; original labels are preserved.
        """
        kept = sorted(set(vertices))
        remap = {v: i for i, v in enumerate(kept)}
        edges = [
            (remap[u], remap[v], p)
            for u, v, p in self.edges
            if u in remap and v in remap
        ]
        return UncertainGraph.from_edges(
            edges, n=len(kept), labels=[self.labels[v] for v in kept]
        )


def parse_edge_list(source) -> UncertainGraph:
    """Parse `u v p` lines into an :class:`UncertainGraph`.

    ``source`` may be a string or any iterable of lines.  Blank lines and
    lines starting with ``#`` are ignored.  Edges with p = 0 are dropped and
    counted in ``dropped_edges``; their endpoints are still registered.
    Self-loops, duplicate edges (either orientation), and probabilities
    outside [0, 1] raise :class:`GraphParseError` with the line number.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    label_to_id: dict[int, int] = {}
    labels: list[int] = []
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    dropped = 0

    def vid(label: int) -> int:
        i = label_to_id.get(label)
        if i is None:
            i = len(labels)
            label_to_id[label] = i
            labels.append(label)
        return i

    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphParseError(line_no, f"expected 'u v p', got {line!r}")
        try:
            lu, lv = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(line_no, f"vertex ids must be integers, got {line!r}")
        try:
            p = float(parts[2])
        except ValueError:
            raise GraphParseError(line_no, f"bad probability {parts[2]!r}")
        if not 0.0 <= p <= 1.0:
            raise GraphParseError(line_no, f"probability {p} outside [0, 1]")
        if lu == lv:
            raise GraphParseError(line_no, f"self-loop at vertex {lu}")
        u, v = vid(lu), vid(lv)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphParseError(line_no, f"duplicate edge {lu} {lv}")
        seen.add(key)
        if p == 0.0:
            dropped += 1
            continue
        edges.append((key[0], key[1], p))

    g = UncertainGraph.from_edges(edges, n=len(labels), labels=labels)
    g.dropped_edges = dropped
    return g


def write_edge_list(g: UncertainGraph) -> str:
    """Render the graph back to edge-list text, probabilities at 17 significant digits."""
    out = []
    for u, v, p in g.edges:
        out.append(f"{g.labels[u]} {g.labels[v]} {format(p, '.17g')}\n")
    return "".join(out)


def fingerprint(g: UncertainGraph) -> str:
    """Content hash of the canonical edge-list rendering."""
    return hashlib.sha256(write_edge_list(g).encode("utf-8")).hexdigest()


def k_core(g: UncertainGraph, k: int) -> set[int]:
    """Maximal set of alive vertices with >= k alive neighbors inside the set.

    Bucket-free peeling over live degrees; does not mutate the graph.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    deg = g.live_deg.copy()
    out = [not a for a in g.alive]
    queue = deque(u for u in range(g.n) if g.alive[u] and deg[u] < k)
    while queue:
        u = queue.popleft()
        if out[u]:
            continue
        out[u] = True
        for v, _ in g.adj[u]:
            if not out[v]:
                deg[v] -= 1
                if deg[v] == k - 1:
                    queue.append(v)
    return {u for u in range(g.n) if not out[u]}


def k_max(g: UncertainGraph) -> int:
    """Largest k whose deterministic k-core is non-empty; 0 for edgeless graphs."""
    k = 0
    while k_core(g, k + 1):
        k += 1
    return k


def connected_components(g: UncertainGraph, vertices: set[int]) -> list[set[int]]:
    """Components of the induced subgraph over ``vertices``."""
    seen: set[int] = set()
    comps: list[set[int]] = []
    for s in sorted(vertices):
        if s in seen:
            continue
        comp = {s}
        seen.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, _ in g.adj[u]:
                if v in vertices and v not in seen:
                    seen.add(v)
                    comp.add(v)
                    queue.append(v)
        comps.append(comp)
    return comps
