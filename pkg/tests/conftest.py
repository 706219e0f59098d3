import random

import pytest

from ucfcore import UncertainGraph, gnm_graph


def random_incident_list(rng: random.Random, max_len: int = 12) -> list[float]:
    d = rng.randint(1, max_len)
    return sorted((1.0 - rng.random() for _ in range(d)), reverse=True)


def small_random_graph(rng: random.Random, max_n: int = 60, max_m: int = 150):
    n = rng.randint(4, max_n)
    cap = n * (n - 1) // 2
    m = rng.randint(1, min(max_m, cap))
    return gnm_graph(n, m, seed=rng.randrange(1 << 30))


@pytest.fixture
def triangle() -> UncertainGraph:
    return UncertainGraph.from_edges([(0, 1, 0.5), (1, 2, 0.5), (0, 2, 0.5)])


@pytest.fixture
def path3() -> UncertainGraph:
    """v0 - v1 (p 0.9), v1 - v2 (p 0.8)."""
    return UncertainGraph.from_edges([(0, 1, 0.9), (1, 2, 0.8)])
