"""Exact k-probabilities by dynamic programming, the division-based update,
and the binomial-tail bounds used to skip or delay recomputation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass
class DegreeDistribution:
    """Lower tail Pr(deg = i) for i in [0, k-1] of one vertex.

    ``source_degree`` is the number of incident edges folded in; whenever it
    is below k the derived k-probability is exactly 0.
    """

    probs: list[float]
    k: int
    source_degree: int


@dataclass(frozen=True)
class ProbBounds:
    lb: float
    ub: float


def _fold(incident_probs, k: int) -> list[float]:
    """Fold incident edges into the lower-tail degree distribution.

    x[i] after folding h edges is Pr(deg = i) over those h edges; each edge
    updates x in place via x[i] = p*x[i-1] + (1-p)*x[i], processed in the
    caller-supplied order (adjacency order everywhere in this package).
    """
    x = [0.0] * k
    x[0] = 1.0
    for h, p in enumerate(incident_probs):
        q = 1.0 - p
        top = h + 1 if h + 1 < k else k - 1
        for i in range(top, 0, -1):
            x[i] = p * x[i - 1] + q * x[i]
        x[0] = q * x[0]
    return x


def kprob_value(incident_probs, k: int) -> float:
    """Pr(deg >= k) of a vertex with the given alive incident probabilities.

    Returns exactly 0 when fewer than k edges are present; otherwise
    1 - sum of the lower tail, clamped to [0, 1].  The tail is summed in
    ascending index order; keeping one fixed evaluation order everywhere is
    what lets independently-run peels and queries agree bit-for-bit.
    """
    if len(incident_probs) < k:
        return 0.0
    s = 0.0
    for t in _fold(incident_probs, k):
        s += t
    kp = 1.0 - s
    if kp < 0.0:
        return 0.0
    return 1.0 if kp > 1.0 else kp


def kprob_dp(incident_probs, k: int) -> tuple[float, DegreeDistribution]:
    """k-probability plus the degree distribution it was derived from."""
    if k < 1:
        raise ValueError("k must be >= 1")
    x = _fold(incident_probs, k)
    d = len(incident_probs)
    if d < k:
        kp = 0.0
    else:
        s = 0.0
        for t in x:
            s += t
        kp = 1.0 - s
        kp = 0.0 if kp < 0.0 else (1.0 if kp > 1.0 else kp)
    return kp, DegreeDistribution(x, k, d)


def ec_remove_edge(
    dist: DegreeDistribution, kprob: float, p_e: float
) -> tuple[float, DegreeDistribution]:
    """Division-based removal of one edge with probability p_e from the fold.

    This is the numerically unstable update kept as a reference mode: no
    clamping is applied, and repeated application amplifies roundoff by a
    factor on the order of 1/(1-p_e) per step.  Whether p_e was actually in
    the folded multiset is not detectable here; callers own that contract.
    """
    if not 0.0 < p_e < 1.0:
        raise ValueError("division update requires 0 < p_e < 1")
    q = 1.0 - p_e
    out = [0.0] * dist.k
    out[0] = dist.probs[0] / q
    for i in range(1, dist.k):
        out[i] = (dist.probs[i] - p_e * out[i - 1]) / q
    s = 0.0
    for t in out:
        s += t
    return 1.0 - s, DegreeDistribution(out, dist.k, dist.source_degree - 1)


_beta_cache: dict[tuple[float, int, int], float] = {}
_BETA_CACHE_CAP = 1 << 18


def beta_tail(z: float, k: int, d: int) -> float:
    """Pr(Binomial(d, z) >= k), the regularized incomplete beta I_z(k, d-k+1).

    Exact at z in {0, 1}; returns 0 when d < k.  Results are memoized per
    exact (z, k, d); plain dict operations keep the cache safe under
    concurrent readers.
    """
    if d < k:
        return 0.0
    if z <= 0.0:
        return 0.0
    if z >= 1.0:
        return 1.0
    key = (z, k, d)
    v = _beta_cache.get(key)
    if v is None:
        # Sum the side with fewer terms; the complement costs one subtraction.
        if d - k + 1 <= k:
            s = _binom_range_sum(z, d, k, d)
            v = 1.0 if s > 1.0 else s
        else:
            s = 1.0 - _binom_range_sum(z, d, 0, k - 1)
            v = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
        if len(_beta_cache) >= _BETA_CACHE_CAP:
            _beta_cache.clear()
        _beta_cache[key] = v
    return v


def _binom_range_sum(z: float, d: int, lo: int, hi: int) -> float:
    """Sum of C(d,i) z^i (1-z)^(d-i) for i in [lo, hi] via term-ratio updates."""
    q = 1.0 - z
    r = z / q
    if d <= 200:
        t = math.comb(d, lo) * z**lo * q ** (d - lo)
    else:
        log_t = (
            math.lgamma(d + 1)
            - math.lgamma(lo + 1)
            - math.lgamma(d - lo + 1)
            + lo * math.log(z)
            + (d - lo) * math.log(q)
        )
        if log_t <= -700.0:
            # Leading term underflows but terms toward the mode may not:
            # stay in log space per term.
            log_r = math.log(r)
            terms = []
            for i in range(lo, hi + 1):
                terms.append(math.exp(log_t) if log_t > -745.0 else 0.0)
                log_t += math.log((d - i) / (i + 1)) + log_r
            return math.fsum(terms)
        t = math.exp(log_t)
    total = 0.0
    for i in range(lo, hi + 1):
        total += t
        t *= (d - i) / (i + 1) * r
    return total


def bounds(incident_probs, k: int, lower: str = "both") -> ProbBounds:
    """Lower/upper bounds on the k-probability of a vertex.

    ``incident_probs`` must be sorted non-increasing.  The upper bound is the
    binomial tail at the largest incident probability; the lower bound is the
    larger of the tail at the smallest probability and the product of the k
    largest probabilities (O(k)).  ``lower`` selects which lower-bound terms
    participate: "both", "topk", or "beta".
    """
    d = len(incident_probs)
    if d < k:
        return ProbBounds(0.0, 0.0)
    ub = upper_bound(incident_probs, k)
    lb = lower_bound(incident_probs, k, lower)
    # Rounding can lift the top-k product a ulp above the tail at p_max.
    return ProbBounds(lb if lb <= ub else ub, ub)


def upper_bound(incident_probs, k: int) -> float:
    """The binomial-tail upper bound at the largest incident probability.

    Requires len(incident_probs) >= k.  A uniform list is the equality case:
    the tail coincides with the k-probability itself, so it takes the value's
    own computation path rather than racing two roundings of one number.
    """
    if incident_probs[0] == incident_probs[-1]:
        return kprob_value(incident_probs, k)
    return beta_tail(incident_probs[0], k, len(incident_probs))


def lower_bound(incident_probs, k: int, lower: str = "both") -> float:
    """The selected lower-bound terms; requires len(incident_probs) >= k.

    Uniform lists and the d == k case are equality regimes and reuse the
    k-probability's own fold so the bound can never round above the value.
    """
    d = len(incident_probs)
    if incident_probs[0] == incident_probs[-1]:
        return kprob_value(incident_probs, k)
    if lower == "beta":
        return beta_tail(incident_probs[-1], k, d)
    if d == k:
        # The top-k term is the k-probability itself and dominates the tail.
        return kprob_value(incident_probs, k)
    topk = math.prod(incident_probs[:k])
    if lower == "topk":
        return topk
    # C(d,k) p_min^k dominates the tail at p_min (union bound); when even it
    # cannot beat the top-k term, skip the tail summation outright.
    p_min = incident_probs[-1]
    if d <= 200 and math.comb(d, k) * p_min**k <= topk:
        return topk
    beta = beta_tail(p_min, k, d)
    return beta if beta > topk else topk
