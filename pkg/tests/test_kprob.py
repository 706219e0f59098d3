import math
import random

import pytest
from scipy.special import betainc

from ucfcore import (
    beta_tail,
    bounds,
    ec_remove_edge,
    enumerate_kprob,
    kprob_dp,
    kprob_value,
)

from conftest import random_incident_list


def test_kprob_single_edge():
    kp, dist = kprob_dp([0.5], 1)
    assert kp == 0.5
    assert dist.source_degree == 1


def test_kprob_heterogeneous_triple():
    kp, _ = kprob_dp([0.9, 0.8, 0.1], 2)
    assert abs(kp - 0.746) < 1e-12
    assert abs(kp - enumerate_kprob([0.9, 0.8, 0.1], 2)) < 1e-12


def test_kprob_two_halves():
    assert kprob_dp([0.5, 0.5], 2)[0] == 0.25


def test_kprob_zero_when_degree_below_k():
    kp, dist = kprob_dp([0.7, 0.7, 0.7], 4)
    assert kp == 0.0
    assert dist.source_degree == 3


def test_kprob_degenerate_certain_edges():
    assert kprob_value([1.0] * 5, 3) == 1.0
    assert kprob_value([1.0] * 2, 3) == 0.0
    assert kprob_value([], 1) == 0.0


def test_kprob_requires_positive_k():
    with pytest.raises(ValueError):
        kprob_dp([0.5], 0)


def test_distribution_entries_are_probabilities():
    rng = random.Random(8)
    for _ in range(300):
        probs = random_incident_list(rng)
        k = rng.randint(1, 12)
        _, dist = kprob_dp(probs, k)
        assert all(-1e-12 <= x <= 1.0 + 1e-12 for x in dist.probs)
        assert sum(dist.probs) <= 1.0 + 1e-12


def test_ec_single_removal_matches_fresh_dp():
    kp, dist = kprob_dp([0.5, 0.5], 1)
    assert dist.probs[0] == 0.25
    kp2, dist2 = ec_remove_edge(dist, kp, 0.5)
    assert dist2.probs[0] == 0.5
    assert kp2 == kprob_dp([0.5], 1)[0] == 0.5


def test_ec_removal_from_single_edge_gives_zero():
    kp, dist = kprob_dp([0.7], 1)
    kp2, dist2 = ec_remove_edge(dist, kp, 0.7)
    assert abs(kp2) < 1e-12
    assert dist2.source_degree == 0


def test_ec_rejects_degenerate_probabilities():
    _, dist = kprob_dp([0.5, 0.5], 1)
    with pytest.raises(ValueError):
        ec_remove_edge(dist, 0.75, 1.0)
    with pytest.raises(ValueError):
        ec_remove_edge(dist, 0.75, 0.0)


def test_ec_dyadic_single_removal_consistency():
    rng = random.Random(21)
    for _ in range(200):
        d = rng.randint(2, 10)
        probs = sorted(
            (rng.randint(1, 15) / 16.0 for _ in range(d)), reverse=True
        )
        k = rng.randint(1, d)
        kp, dist = kprob_dp(probs, k)
        i = rng.randrange(d)
        p_e = probs[i]
        reduced = probs[:i] + probs[i + 1 :]
        kp2, _ = ec_remove_edge(dist, kp, p_e)
        assert abs(kp2 - kprob_dp(reduced, k)[0]) <= 1e-9


def test_ec_chain_at_extreme_probabilities_diverges():
    # Repeated division updates at p = 0.9999 amplify roundoff beyond unit
    # level; the fresh DP value for the final single-edge list is exactly 0.
    probs = [0.9999] * 21
    kp, dist = kprob_dp(probs, 2)
    for _ in range(20):
        kp, dist = ec_remove_edge(dist, kp, 0.9999)
    assert abs(kp - 0.0) > 2.3e-16


def test_ec_chain_with_mixed_extreme_probabilities_diverges_badly():
    rng = random.Random(3)
    probs = sorted((rng.uniform(0.99, 0.999) for _ in range(14)), reverse=True)
    kp, dist = kprob_dp(probs, 5)
    cur = list(probs)
    worst = 0.0
    while len(cur) > 1:
        p_e = cur.pop()
        kp, dist = ec_remove_edge(dist, kp, p_e)
        worst = max(worst, abs(kp - kprob_value(cur, 5)))
    assert worst > 1e-6


def test_beta_tail_examples():
    assert abs(beta_tail(0.5, 2, 3) - 0.5) < 1e-12
    assert beta_tail(1.0, 2, 5) == 1.0
    assert abs(beta_tail(0.1, 2, 3) - 0.028) < 1e-12
    assert beta_tail(0.5, 3, 2) == 0.0  # d < k
    assert beta_tail(0.0, 1, 5) == 0.0


def test_beta_tail_matches_scipy():
    rng = random.Random(77)
    worst = 0.0
    for _ in range(2000):
        d = rng.randint(1, 40)
        k = rng.randint(1, min(d, 15))
        z = rng.random()
        worst = max(worst, abs(beta_tail(z, k, d) - float(betainc(k, d - k + 1, z))))
    assert worst <= 1e-12


def test_beta_tail_monotonicity_grid():
    zs = [0.05 * i for i in range(1, 20)]
    for d in range(1, 12):
        for k in range(1, d + 1):
            vals = [beta_tail(z, k, d) for z in zs]
            assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))
    for z in (0.2, 0.5, 0.8):
        for k in range(1, 8):
            by_d = [beta_tail(z, k, d) for d in range(k, 20)]
            assert all(a <= b + 1e-15 for a, b in zip(by_d, by_d[1:]))
        for d in (5, 10, 15):
            by_k = [beta_tail(z, k, d) for k in range(1, d + 1)]
            assert all(a >= b - 1e-15 for a, b in zip(by_k, by_k[1:]))


def test_beta_tail_huge_degree_does_not_underflow_to_garbage():
    # The leading term of the summed tail underflows here; the log-space
    # fallback must still place the value in (0, 1).
    v = beta_tail(0.5, 1100, 2200)
    assert 0.4 < v < 0.6


def test_bounds_heterogeneous_example():
    b = bounds([0.9, 0.8, 0.1], 2)
    assert abs(b.lb - 0.72) < 1e-12
    assert abs(b.ub - 0.972) < 1e-12


def test_bounds_uniform_collapse():
    b = bounds([0.5, 0.5, 0.5], 2)
    kp = kprob_value([0.5, 0.5, 0.5], 2)
    assert b.lb == b.ub == kp == 0.5


def test_bounds_degenerate_below_k():
    assert bounds([0.9], 2) == bounds([0.9], 2).__class__(0.0, 0.0)


def test_bounds_sandwich_on_random_lists():
    rng = random.Random(99)
    for _ in range(2000):
        probs = random_incident_list(rng)
        k = rng.randint(1, 12)
        kp = kprob_value(probs, k)
        for mode in ("both", "topk", "beta"):
            b = bounds(probs, k, mode)
            assert 0.0 <= b.lb <= kp <= b.ub <= 1.0, (probs, k, mode)


def test_bounds_mode_both_dominates_single_modes():
    rng = random.Random(123)
    for _ in range(500):
        probs = random_incident_list(rng)
        k = rng.randint(1, len(probs))
        both = bounds(probs, k, "both")
        for mode in ("topk", "beta"):
            assert bounds(probs, k, mode).lb <= both.lb + 1e-15


def test_dp_matches_enumeration_on_random_lists():
    rng = random.Random(1234)
    for _ in range(300):
        probs = random_incident_list(rng)
        for k in range(1, len(probs) + 2):
            assert abs(kprob_value(probs, k) - enumerate_kprob(probs, k)) <= 1e-12


def test_fold_order_is_deterministic():
    probs = [0.9, 0.5, 0.3]
    assert kprob_value(probs, 2) == kprob_value(list(probs), 2)
    assert kprob_dp(probs, 2)[0] == kprob_value(probs, 2)
