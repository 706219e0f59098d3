"""Compiled peel kernels for the two benchmarked construction algorithms.

These mirror the pure-Python peelers in decompose.py step for step.  The DP
fold (the only computation whose bits reach the recorded thresholds) uses the
identical operation sequence, so kernel-built and Python-built indexes carry
the same threshold values; the bound computations only steer control flow and
may differ from the Python path at the last ulp.

Heaps are (key, vertex) pairs in parallel arrays ordered lexicographically,
with lazy deletion by key mismatch, exactly like the Python peelers.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba present in normal installs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


_warmed = False


def warmup() -> None:
    """Force JIT compilation (or cache load) outside any timed section."""
    global _warmed
    if _warmed or not HAVE_NUMBA:
        return
    indptr = np.array([0, 2, 4, 6], dtype=np.int64)
    nbrs = np.array([1, 2, 0, 2, 0, 1], dtype=np.int64)
    probs = np.full(6, 0.5)
    mask = np.ones(3, dtype=np.bool_)
    peel_bc(indptr, nbrs, probs, mask, 2)
    peel_opstar(
        indptr,
        nbrs,
        probs,
        mask,
        2,
        np.arange(3, dtype=np.int64),
        np.zeros(1, dtype=np.int64),
        np.zeros(0, dtype=np.int64),
        np.zeros(0),
        0,
    )
    _warmed = True


@njit(cache=True)
def _hpush(hk, hv, size, key, v):
    i = size
    hk[i] = key
    hv[i] = v
    while i > 0:
        parent = (i - 1) >> 1
        pk = hk[parent]
        if key < pk or (key == pk and v < hv[parent]):
            hk[i] = pk
            hv[i] = hv[parent]
            i = parent
        else:
            break
    hk[i] = key
    hv[i] = v
    return size + 1


@njit(cache=True)
def _hpop(hk, hv, size):
    size -= 1
    key = hk[size]
    v = hv[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        right = left + 1
        child = left
        if right < size and (
            hk[right] < hk[left] or (hk[right] == hk[left] and hv[right] < hv[left])
        ):
            child = right
        ck = hk[child]
        if ck < key or (ck == key and hv[child] < v):
            hk[i] = ck
            hv[i] = hv[child]
            i = child
        else:
            break
    hk[i] = key
    hv[i] = v
    return size


@njit(cache=True)
def _fold_kprob(scratch, cnt, k, xbuf):
    """Identical operation sequence to kprob.kprob_value over scratch[:cnt]."""
    if cnt < k:
        return 0.0
    for i in range(k):
        xbuf[i] = 0.0
    xbuf[0] = 1.0
    for h in range(cnt):
        p = scratch[h]
        q = 1.0 - p
        top = h + 1
        if top > k - 1:
            top = k - 1
        i = top
        while i > 0:
            xbuf[i] = p * xbuf[i - 1] + q * xbuf[i]
            i -= 1
        xbuf[0] = q * xbuf[0]
    s = 0.0
    for i in range(k):
        s += xbuf[i]
    kp = 1.0 - s
    if kp < 0.0:
        return 0.0
    if kp > 1.0:
        return 1.0
    return kp


@njit(cache=True)
def _beta_tail(z, k, d):
    """Pr(Binomial(d, z) >= k); steers control flow only, ulps are free."""
    if d < k:
        return 0.0
    if z <= 0.0:
        return 0.0
    if z >= 1.0:
        return 1.0
    q = 1.0 - z
    if d - k + 1 <= k:
        lo, hi = k, d
        complement = False
    else:
        lo, hi = 0, k - 1
        complement = True
    if lo == 0:
        log_t = d * math.log(q)
    else:
        log_t = (
            math.lgamma(d + 1.0)
            - math.lgamma(lo + 1.0)
            - math.lgamma(d - lo + 1.0)
            + lo * math.log(z)
            + (d - lo) * math.log(q)
        )
    total = 0.0
    if log_t > -700.0:
        t = math.exp(log_t)
        r = z / q
        for i in range(lo, hi + 1):
            total += t
            t *= (d - i) / (i + 1.0) * r
    else:
        log_r = math.log(z) - math.log(q)
        for i in range(lo, hi + 1):
            if log_t > -745.0:
                total += math.exp(log_t)
            log_t += math.log((d - i) / (i + 1.0)) + log_r
    if complement:
        s = 1.0 - total
        if s < 0.0:
            return 0.0
        if s > 1.0:
            return 1.0
        return s
    return total if total < 1.0 else 1.0


@njit(cache=True)
def _comb_float(d, k):
    c = 1.0
    for i in range(1, k + 1):
        c = c * (d - k + i) / i
    return c


@njit(cache=True)
def peel_bc(indptr, nbrs, probs, in_core, k):
    """Always-recompute peel; returns (order, thres, first_kp, refreshes)."""
    n = indptr.shape[0] - 1
    alive = in_core.copy()
    live_deg = np.zeros(n, np.int64)
    core_count = 0
    maxdeg = 0
    for u in range(n):
        d = indptr[u + 1] - indptr[u]
        if d > maxdeg:
            maxdeg = d
        if alive[u]:
            core_count += 1
            c = 0
            for j in range(indptr[u], indptr[u + 1]):
                if alive[nbrs[j]]:
                    c += 1
            live_deg[u] = c
    kp = np.zeros(n)
    first = np.full(n, -1.0)
    scratch = np.empty(max(maxdeg, 1))
    xbuf = np.empty(k)
    cap = n + nbrs.shape[0] + 16
    hk = np.empty(cap)
    hv = np.empty(cap, np.int64)
    hs = 0
    refreshes = 0
    for u in range(n):
        if alive[u]:
            cnt = 0
            for j in range(indptr[u], indptr[u + 1]):
                if alive[nbrs[j]]:
                    scratch[cnt] = probs[j]
                    cnt += 1
            v = _fold_kprob(scratch, cnt, k, xbuf)
            refreshes += 1
            kp[u] = v
            first[u] = v
            hs = _hpush(hk, hv, hs, v, u)

    order = np.empty(core_count, np.int64)
    thres = np.empty(core_count)
    cur = 0.0
    deleted = 0
    while deleted < core_count:
        while True:
            key = hk[0]
            u = hv[0]
            hs = _hpop(hk, hv, hs)
            if alive[u] and key == kp[u]:
                break
        if key > cur:
            cur = key
        order[deleted] = u
        thres[deleted] = cur
        deleted += 1
        alive[u] = False
        for j in range(indptr[u], indptr[u + 1]):
            w = nbrs[j]
            if alive[w]:
                live_deg[w] -= 1
                if kp[w] > 0.0:
                    cnt = 0
                    for jj in range(indptr[w], indptr[w + 1]):
                        if alive[nbrs[jj]]:
                            scratch[cnt] = probs[jj]
                            cnt += 1
                    nv = _fold_kprob(scratch, cnt, k, xbuf)
                    refreshes += 1
                    kp[w] = nv
                    hs = _hpush(hk, hv, hs, nv, w)
    return order, thres, first, refreshes


@njit(cache=True)
def peel_opstar(
    indptr,
    nbrs,
    probs,
    in_core,
    k,
    pt,
    layer_indptr,
    layer_verts,
    lambdas,
    mode,
):
    """Lazy-refresh + layered peel; mode: 0 = both bounds, 1 = topk, 2 = beta.

    Returns (order, thres, first_kp, refreshes).
    """
    n = indptr.shape[0] - 1
    alive = in_core.copy()
    live_deg = np.zeros(n, np.int64)
    core_count = 0
    maxdeg = 0
    for u in range(n):
        d = indptr[u + 1] - indptr[u]
        if d > maxdeg:
            maxdeg = d
        if alive[u]:
            core_count += 1
            c = 0
            for j in range(indptr[u], indptr[u + 1]):
                if alive[nbrs[j]]:
                    c += 1
            live_deg[u] = c

    defkey = np.zeros(n)
    lbv = np.zeros(n)
    in_vw = np.zeros(n, np.bool_)
    in_d = np.zeros(n, np.bool_)
    tail = np.full(n, -1, np.int64)
    kp_first = np.full(n, -1.0)
    scratch = np.empty(max(maxdeg, 1))
    xbuf = np.empty(k)

    edge_cap = nbrs.shape[0] + 16
    dk = np.empty(edge_cap)
    dv = np.empty(edge_cap, np.int64)
    ds = 0
    cap = n + 2 * nbrs.shape[0] + 16
    hk = np.empty(cap)
    hv = np.empty(cap, np.int64)
    hs = 0

    refreshes = 0
    vw_count = 0
    l = lambdas.shape[0]
    cursor = 0

    # initialize the outermost layer
    for idx in range(pt.shape[0]):
        u = pt[idx]
        cnt = 0
        for j in range(indptr[u], indptr[u + 1]):
            if alive[nbrs[j]]:
                scratch[cnt] = probs[j]
                cnt += 1
        v = _fold_kprob(scratch, cnt, k, xbuf)
        refreshes += 1
        kp_first[u] = v
        defkey[u] = v
        in_vw[u] = True
        vw_count += 1
        hs = _hpush(hk, hv, hs, v, u)

    order = np.empty(core_count, np.int64)
    thres = np.empty(core_count)
    cur = 0.0
    deleted = 0
    while deleted < core_count:
        # argmin over definite working-set vertices (sentinel key 2.0)
        cand_key = 2.0
        cand_u = -1
        while hs > 0:
            key = hk[0]
            u = hv[0]
            if alive[u] and in_vw[u] and not in_d[u] and key == defkey[u]:
                cand_key = key
                cand_u = u
                break
            hs = _hpop(hk, hv, hs)
        # refresh indefinite vertices whose lower bound undercuts the candidate
        while ds > 0:
            dkey = dk[0]
            du = dv[0]
            if not (alive[du] and in_d[du] and dkey == lbv[du]):
                ds = _hpop(dk, dv, ds)
                continue
            if dkey >= cand_key:
                break
            ds = _hpop(dk, dv, ds)
            cnt = 0
            for j in range(indptr[du], indptr[du + 1]):
                if alive[nbrs[j]]:
                    scratch[cnt] = probs[j]
                    cnt += 1
            v = _fold_kprob(scratch, cnt, k, xbuf)
            refreshes += 1
            if kp_first[du] < 0.0:
                kp_first[du] = v
            in_d[du] = False
            defkey[du] = v
            hs = _hpush(hk, hv, hs, v, du)
            if v < cand_key or (v == cand_key and du < cand_u):
                cand_key = v
                cand_u = du
        # pull in layers whose threshold lies below the candidate
        while cursor < l and lambdas[cursor] < cand_key:
            for idx in range(layer_indptr[cursor], layer_indptr[cursor + 1]):
                u = layer_verts[idx]
                cnt = 0
                for j in range(indptr[u], indptr[u + 1]):
                    if alive[nbrs[j]]:
                        scratch[cnt] = probs[j]
                        cnt += 1
                v = _fold_kprob(scratch, cnt, k, xbuf)
                refreshes += 1
                if kp_first[u] < 0.0:
                    kp_first[u] = v
                defkey[u] = v
                in_d[u] = False
                if not in_vw[u]:
                    in_vw[u] = True
                    vw_count += 1
                hs = _hpush(hk, hv, hs, v, u)
                if v < cand_key or (v == cand_key and u < cand_u):
                    cand_key = v
                    cand_u = u
            cursor += 1

        # delete the candidate
        u = cand_u
        if cand_key > cur:
            cur = cand_key
        order[deleted] = u
        thres[deleted] = cur
        deleted += 1
        in_vw[u] = False
        vw_count -= 1
        alive[u] = False
        for j in range(indptr[u], indptr[u + 1]):
            w = nbrs[j]
            if not alive[w]:
                continue
            live_deg[w] -= 1
            if not in_vw[w]:
                continue
            if defkey[w] == 0.0 and not in_d[w]:
                continue  # already zeroed, nothing can raise it
            deg = live_deg[w]
            if deg < k:
                defkey[w] = 0.0
                in_d[w] = False
                hs = _hpush(hk, hv, hs, 0.0, w)
                continue
            t = tail[w]
            if t < 0:
                t = indptr[w + 1] - 1
            while not alive[nbrs[t]]:
                t -= 1
            tail[w] = t
            p_min = probs[t]
            ub = -1.0
            if deg == k:
                cnt = 0
                for jj in range(indptr[w], t + 1):
                    if alive[nbrs[jj]]:
                        scratch[cnt] = probs[jj]
                        cnt += 1
                p_max = scratch[0]
                if p_max == p_min:
                    lb = _fold_kprob(scratch, cnt, k, xbuf)
                    ub = lb
                elif mode == 2:
                    lb = _beta_tail(p_min, k, deg)
                else:
                    lb = _fold_kprob(scratch, cnt, k, xbuf)
            else:
                prod = 1.0
                left = k
                p_max = -1.0
                for jj in range(indptr[w], t + 1):
                    if alive[nbrs[jj]]:
                        p = probs[jj]
                        if p_max < 0.0:
                            p_max = p
                        prod *= p
                        left -= 1
                        if left == 0:
                            break
                if p_max == p_min:
                    for i in range(deg):
                        scratch[i] = p_max
                    lb = _fold_kprob(scratch, deg, k, xbuf)
                    ub = lb
                elif mode == 2:
                    lb = _beta_tail(p_min, k, deg)
                else:
                    lb = prod
                    if mode == 0 and not (
                        deg <= 200 and _comb_float(deg, k) * p_min**k <= prod
                    ):
                        beta = _beta_tail(p_min, k, deg)
                        if beta > lb:
                            lb = beta
            if lb <= cur:
                if ub < 0.0:
                    ub = _beta_tail(p_max, k, deg)
                if ub <= cur:
                    defkey[w] = 0.0
                    in_d[w] = False
                    hs = _hpush(hk, hv, hs, 0.0, w)
                    continue
            lbv[w] = lb
            in_d[w] = True
            ds = _hpush(dk, dv, ds, lb, w)

        if vw_count == 0 and cursor < l:
            for idx in range(layer_indptr[cursor], layer_indptr[cursor + 1]):
                u = layer_verts[idx]
                cnt = 0
                for j in range(indptr[u], indptr[u + 1]):
                    if alive[nbrs[j]]:
                        scratch[cnt] = probs[j]
                        cnt += 1
                v = _fold_kprob(scratch, cnt, k, xbuf)
                refreshes += 1
                if kp_first[u] < 0.0:
                    kp_first[u] = v
                defkey[u] = v
                in_d[u] = False
                if not in_vw[u]:
                    in_vw[u] = True
                    vw_count += 1
                hs = _hpush(hk, hv, hs, v, u)
            cursor += 1
    return order, thres, kp_first, refreshes
