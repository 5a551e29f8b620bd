"""Reference solver for tiny coordinate problems.

Enumerates every allowed-nonzero pattern and solves the continuous segment
problems with generic machinery (exhaustive block partitions for q = 0, a
linear program for q = 1, smooth convex minimization for q > 1), so it
shares no logic with the production recursions.  Exponential in T; refuses
T > 10.  Test use only.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize

__all__ = ["brute_force_oracle"]

_MAX_T = 10


def _l0_segment_exhaustive(lo, hi, a, b, n):
    """Minimum breakpoint count over all block partitions of [a, b)."""
    if a >= b:
        return 0.0
    L = b - a
    best = math.inf
    for cuts in range(1 << (L - 1)):
        bounds = [a]
        for i in range(L - 1):
            if cuts >> i & 1:
                bounds.append(a + i + 1)
        bounds.append(b)
        m = len(bounds) - 1
        cost = float(m - 1)
        ok = True
        for bi in range(m):
            s, e = bounds[bi], bounds[bi + 1]
            blo = float(np.max(lo[s:e]))
            bhi = float(np.min(hi[s:e]))
            if blo > bhi:
                ok = False
                break
            has_zero = blo <= 0.0 <= bhi
            if bi == 0 and a > 0 and not has_zero:
                cost += 1.0
            if bi == m - 1 and b < n and not has_zero:
                cost += 1.0
        if ok and cost < best:
            best = cost
    return best


def _lq_segment_lp(lo, hi, a, b, n):
    """q = 1 segment cost as an LP in (theta, absolute-difference) variables."""
    L = b - a
    left = a > 0
    right = b < n
    nd = (L - 1) + int(left) + int(right)
    if nd == 0:
        return 0.0  # single free-floating variable, no temporal terms
    nv = L + nd
    c = np.concatenate([np.zeros(L), np.ones(nd)])
    rows = []
    rhs = []

    def pair(coefs):
        rows.append(coefs)
        rhs.append(0.0)

    di = L
    for i in range(L - 1):
        r = np.zeros(nv)
        r[i], r[i + 1], r[di] = -1.0, 1.0, -1.0
        pair(r)
        r = np.zeros(nv)
        r[i], r[i + 1], r[di] = 1.0, -1.0, -1.0
        pair(r)
        di += 1
    if left:
        r = np.zeros(nv)
        r[0], r[di] = 1.0, -1.0
        pair(r)
        r = np.zeros(nv)
        r[0], r[di] = -1.0, -1.0
        pair(r)
        di += 1
    if right:
        r = np.zeros(nv)
        r[L - 1], r[di] = 1.0, -1.0
        pair(r)
        r = np.zeros(nv)
        r[L - 1], r[di] = -1.0, -1.0
        pair(r)
    bounds = [(lo[a + i], hi[a + i]) for i in range(L)] + [(0, None)] * nd
    res = optimize.linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"segment LP failed: {res.message}")
    return float(res.fun)


def _lq_segment_smooth(lo, hi, q, a, b, n):
    """q > 1 segment cost by box-constrained quasi-Newton minimization."""
    L = b - a
    slo = lo[a:b]
    shi = hi[a:b]
    left = a > 0
    right = b < n

    def fun_grad(x):
        g = np.zeros(L)
        d = np.diff(x)
        f = float(np.sum(np.abs(d) ** q))
        gd = q * np.abs(d) ** (q - 1.0) * np.sign(d)
        g[1:] += gd
        g[:-1] -= gd
        if left:
            f += abs(x[0]) ** q
            g[0] += q * abs(x[0]) ** (q - 1.0) * np.sign(x[0])
        if right:
            f += abs(x[-1]) ** q
            g[-1] += q * abs(x[-1]) ** (q - 1.0) * np.sign(x[-1])
        return f, g

    x0 = np.clip(np.zeros(L), slo, shi)
    res = optimize.minimize(
        fun_grad,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=list(zip(slo, shi)),
        options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": 2000},
    )
    return float(res.fun)


def brute_force_oracle(problem, bar_gamma: float) -> float:
    """Global optimum by enumerating all 2^(T+1) nonzero patterns.

    A pattern fixes which positions may be nonzero; positions outside it are
    pinned to zero (infeasible patterns are skipped) and each maximal run of
    allowed positions becomes an independent segment problem.
    """
    lo, hi, q = problem.lower, problem.upper, problem.q
    n = lo.shape[0]
    if n - 1 > _MAX_T:
        raise ValueError(f"oracle refuses T > {_MAX_T} (exponential enumeration)")
    zok = (lo <= 0.0) & (hi >= 0.0)
    if q == 0.0:
        seg = lambda a, b: _l0_segment_exhaustive(lo, hi, a, b, n)
    elif q == 1.0:
        seg = lambda a, b: _lq_segment_lp(lo, hi, a, b, n)
    else:
        seg = lambda a, b: _lq_segment_smooth(lo, hi, q, a, b, n)
    memo: dict[tuple[int, int], float] = {}

    def seg_cost(a, b):
        key = (a, b)
        if key not in memo:
            memo[key] = seg(a, b)
        return memo[key]

    best = math.inf
    for pat in range(1 << n):
        ok = True
        for t in range(n):
            if not (pat >> t & 1) and not zok[t]:
                ok = False
                break
        if not ok:
            continue
        temporal = 0.0
        count = 0
        t = 0
        while t < n:
            if pat >> t & 1:
                a = t
                while t < n and pat >> t & 1:
                    t += 1
                temporal += seg_cost(a, t)
                count += t - a
            else:
                t += 1
        val = temporal + bar_gamma * count
        if val < best:
            best = val
    return best
