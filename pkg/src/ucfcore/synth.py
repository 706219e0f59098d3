"""Seeded synthetic uncertain graphs for benchmarks and tests."""

from __future__ import annotations

import math
import random

from .graph import UncertainGraph


def _probability(rng: random.Random, band: tuple[float, float] | None) -> float:
    if band is None:
        return 1.0 - rng.random()  # uniform in (0, 1]
    return rng.uniform(band[0], band[1])


def gnm_graph(
    n: int, m: int, seed: int, band: tuple[float, float] | None = None
) -> UncertainGraph:
    """Uniform random simple graph with n vertices and m distinct edges."""
    cap = n * (n - 1) // 2
    if m > cap:
        raise ValueError(f"m={m} exceeds simple-graph capacity {cap}")
    rng = random.Random(seed)
    edges = []
    for t in sorted(rng.sample(range(cap), m)):
        # pairs (u, v) with u < v enumerated by v, then u: t = v(v-1)/2 + u
        v = (math.isqrt(8 * t + 1) + 1) // 2
        if v * (v - 1) // 2 > t:
            v -= 1
        u = t - v * (v - 1) // 2
        edges.append((u, v, _probability(rng, band)))
    return UncertainGraph.from_edges(edges, n=n)


def ba_graph(
    n: int, m: int, seed: int, band: tuple[float, float] | None = None
) -> UncertainGraph:
    """Preferential-attachment graph; each new vertex attaches m edges."""
    if not 1 <= m < n:
        raise ValueError(f"attachment count m={m} must satisfy 1 <= m < n")
    rng = random.Random(seed)
    edges = []
    targets = list(range(m))
    repeated: list[int] = []
    for v in range(m, n):
        for u in targets:
            edges.append((u, v, _probability(rng, band)))
        repeated.extend(targets)
        repeated.extend([v] * m)
        targets = []
        while len(targets) < m:
            u = rng.choice(repeated)
            if u not in targets:
                targets.append(u)
    return UncertainGraph.from_edges(edges, n=n)


def random_graph(
    n: int, m: int, seed: int, model: str = "gnm", band=None
) -> UncertainGraph:
    if model == "gnm":
        return gnm_graph(n, m, seed, band)
    if model == "ba":
        return ba_graph(n, m, seed, band)
    raise ValueError(f"unknown model {model!r}")
