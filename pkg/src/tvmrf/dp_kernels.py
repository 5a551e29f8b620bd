"""Hot loops for the per-coordinate dynamic programs.

Index conventions, shared by everything below: a coordinate problem has T+1
box constraints [lo[t], hi[t]], t = 0..T.  Segment endpoints a, b satisfy
0 <= a <= b <= T+1 and refer to the half-open variable range [a, b).  A
segment carries an implicit pinned-to-zero neighbor on the left when a > 0
and on the right when b < T+1; the outermost ends (a = 0, b = T+1) are free.

``F[a, b]`` is the minimal temporal cost of the segment ignoring per-step
sparsity charges.  The fixed-weight table ``v`` and the budgeted table ``nu``
are built on top of F.

All functions compile under numba and also run as plain Python (see _accel).
"""

import numpy as np

from ._accel import njit


@njit(cache=True, nogil=True)
def f_table_l0(lo, hi):
    """All segment costs for q = 0 via one greedy merge pass per row.

    Returns a (T+2, T+2) float array of breakpoint counts; F[a, a] = 0.
    A running intersection [cl, cu] is maintained; touching intervals merge
    (non-strict comparison), an empty intersection costs one breakpoint.
    """
    Tp1 = lo.shape[0]
    F = np.zeros((Tp1 + 1, Tp1 + 1))
    for a in range(Tp1 + 1):
        if a > 0:
            cl, cu = 0.0, 0.0
        else:
            cl, cu = -np.inf, np.inf
        c = 0.0
        for t in range(a, Tp1):
            nl = max(cl, lo[t])
            nh = min(cu, hi[t])
            if nl <= nh:
                cl, cu = nl, nh
            else:
                c += 1.0
                cl, cu = lo[t], hi[t]
            b = t + 1
            if b < Tp1 and not (cl <= 0.0 <= cu):
                F[a, b] = c + 1.0
            else:
                F[a, b] = c
    return F


@njit(cache=True, nogil=True)
def fill_l0(lo, hi, a, b, out):
    """Greedy q = 0 segment solution written into out[a:b]; returns its cost.

    Each constant block gets the midpoint of its interval intersection; a
    final block that can merge with a pinned right end is placed at zero.
    """
    Tp1 = lo.shape[0]
    if a >= b:
        return 0.0
    if a > 0:
        cl, cu = 0.0, 0.0
    else:
        cl, cu = -np.inf, np.inf
    c = 0.0
    start = a
    for t in range(a, b):
        nl = max(cl, lo[t])
        nh = min(cu, hi[t])
        if nl <= nh:
            cl, cu = nl, nh
        else:
            val = 0.5 * (cl + cu)
            for tau in range(start, t):
                out[tau] = val
            c += 1.0
            cl, cu = lo[t], hi[t]
            start = t
    if b < Tp1:
        if cl <= 0.0 <= cu:
            val = 0.0
        else:
            c += 1.0
            val = 0.5 * (cl + cu)
    else:
        val = 0.5 * (cl + cu)
    for tau in range(start, b):
        out[tau] = val
    return c


@njit(cache=True, nogil=True)
def range_tables(lo, hi):
    """Running max of lo / min of hi over [a, b) for all segment pairs."""
    Tp1 = lo.shape[0]
    Lmax = np.full((Tp1 + 1, Tp1 + 1), -np.inf)
    Umin = np.full((Tp1 + 1, Tp1 + 1), np.inf)
    for a in range(Tp1):
        ml = lo[a]
        mu = hi[a]
        Lmax[a, a + 1] = ml
        Umin[a, a + 1] = mu
        for b in range(a + 2, Tp1 + 1):
            t = b - 1
            if lo[t] > ml:
                ml = lo[t]
            if hi[t] < mu:
                mu = hi[t]
            Lmax[a, b] = ml
            Umin[a, b] = mu
    return Lmax, Umin


@njit(cache=True, nogil=True)
def leg_tables(lo, hi, q):
    """Costs of straight-line legs between bound-anchored variables (q >= 1).

    aa[i, si, j, sj]: variable i at its si bound to variable j at its sj
    bound (0 = lower, 1 = upper), interior values on the straight line; +inf
    when the line leaves some box.  lp[p, j, s] runs from a zero pin at
    position p, rp[i, s, b] into a zero pin at position b (b <= T only; a
    free right end has no pin).
    """
    Tp1 = lo.shape[0]
    aa = np.full((Tp1, 2, Tp1, 2), np.inf)
    lp = np.full((Tp1, Tp1, 2), np.inf)
    rp = np.full((Tp1, 2, Tp1 + 1), np.inf)
    for i in range(Tp1):
        for si in range(2):
            vi = lo[i] if si == 0 else hi[i]
            for j in range(i + 1, Tp1):
                denom = j - i
                for sj in range(2):
                    vj = lo[j] if sj == 0 else hi[j]
                    ok = True
                    for t in range(i + 1, j):
                        v = vi + (t - i) * (vj - vi) / denom
                        if v < lo[t] or v > hi[t]:
                            ok = False
                            break
                    if ok:
                        aa[i, si, j, sj] = abs(vj - vi) ** q / denom ** (q - 1.0)
    for p in range(Tp1):
        for j in range(p + 1, Tp1):
            denom = j - p
            for s in range(2):
                vj = lo[j] if s == 0 else hi[j]
                ok = True
                for t in range(p + 1, j):
                    v = vj * (t - p) / denom
                    if v < lo[t] or v > hi[t]:
                        ok = False
                        break
                if ok:
                    lp[p, j, s] = abs(vj) ** q / denom ** (q - 1.0)
    for i in range(Tp1):
        for s in range(2):
            vi = lo[i] if s == 0 else hi[i]
            for b in range(i + 1, Tp1):
                denom = b - i
                ok = True
                for t in range(i + 1, b):
                    v = vi * (b - t) / denom
                    if v < lo[t] or v > hi[t]:
                        ok = False
                        break
                if ok:
                    rp[i, s, b] = abs(vi) ** q / denom ** (q - 1.0)
    return aa, lp, rp


@njit(cache=True, nogil=True)
def f_table_lq(lo, hi, q, Lmax, Umin, aa, lp, rp):
    """All segment costs for q >= 1 as shortest anchor-to-anchor paths.

    For each left end a, a forward sweep computes the best cost dist[j, s] of
    reaching variable j anchored at bound s; combining with an exit leg (zero
    pin or flat run to a free right end) yields F[a, b] for every b.  The
    anchor-free candidate is all-zero (pinned ends) or any flat feasible
    constant (both ends free).
    """
    Tp1 = lo.shape[0]
    F = np.full((Tp1 + 1, Tp1 + 1), np.inf)
    dist = np.empty((Tp1, 2))
    for a in range(Tp1 + 1):
        F[a, a] = 0.0
        for j in range(a, Tp1):
            for s in range(2):
                v = lo[j] if s == 0 else hi[j]
                if a == 0:
                    best = 0.0 if (Lmax[0, j + 1] <= v <= Umin[0, j + 1]) else np.inf
                else:
                    best = lp[a - 1, j, s]
                for i in range(a, j):
                    for si in range(2):
                        c = dist[i, si] + aa[i, si, j, s]
                        if c < best:
                            best = c
                dist[j, s] = best
        for b in range(a + 1, Tp1 + 1):
            if a == 0 and b == Tp1:
                best = 0.0 if Lmax[a, b] <= Umin[a, b] else np.inf
            else:
                best = 0.0 if (Lmax[a, b] <= 0.0 <= Umin[a, b]) else np.inf
            for j in range(a, b):
                for s in range(2):
                    if b == Tp1:
                        v = lo[j] if s == 0 else hi[j]
                        ex = 0.0 if (Lmax[j, b] <= v <= Umin[j, b]) else np.inf
                    else:
                        ex = rp[j, s, b]
                    c = dist[j, s] + ex
                    if c < best:
                        best = c
            F[a, b] = best
    return F


@njit(cache=True, nogil=True)
def fill_lq(lo, hi, q, a, b, Lmax, Umin, aa, lp, rp, out):
    """Optimal q >= 1 segment solution written into out[a:b]; returns cost.

    Re-runs the anchor shortest path for this (a, b) with parent pointers,
    then fills: straight lines between consecutive anchors and toward pinned
    ends, flat runs toward free ends.
    """
    Tp1 = lo.shape[0]
    if a >= b:
        return 0.0
    m = b - a
    dist = np.full((m, 2), np.inf)
    par = np.full((m, 2), -2, dtype=np.int64)  # -1 entry leg, else (i-a)*2+si
    for j in range(a, b):
        for s in range(2):
            v = lo[j] if s == 0 else hi[j]
            if a == 0:
                best = 0.0 if (Lmax[0, j + 1] <= v <= Umin[0, j + 1]) else np.inf
            else:
                best = lp[a - 1, j, s]
            bp = -1
            for i in range(a, j):
                for si in range(2):
                    c = dist[i - a, si] + aa[i, si, j, s]
                    if c < best:
                        best = c
                        bp = (i - a) * 2 + si
            dist[j - a, s] = best
            par[j - a, s] = bp
    if a == 0 and b == Tp1:
        best = 0.0 if Lmax[a, b] <= Umin[a, b] else np.inf
    else:
        best = 0.0 if (Lmax[a, b] <= 0.0 <= Umin[a, b]) else np.inf
    bj = -1
    bs = 0
    for j in range(a, b):
        for s in range(2):
            if b == Tp1:
                v = lo[j] if s == 0 else hi[j]
                ex = 0.0 if (Lmax[j, b] <= v <= Umin[j, b]) else np.inf
            else:
                ex = rp[j, s, b]
            c = dist[j - a, s] + ex
            if c < best:
                best = c
                bj = j
                bs = s
    if bj < 0:
        if a == 0 and b == Tp1:
            val = 0.5 * (Lmax[a, b] + Umin[a, b])
        else:
            val = 0.0
        for t in range(a, b):
            out[t] = val
        return best
    # backtrack the anchor chain (collected right to left)
    pos = np.empty(m, dtype=np.int64)
    vals = np.empty(m)
    nc = 0
    j = bj
    s = bs
    while True:
        pos[nc] = j
        vals[nc] = lo[j] if s == 0 else hi[j]
        nc += 1
        p = par[j - a, s]
        if p < 0:
            break
        j = a + p // 2
        s = p % 2
    first = pos[nc - 1]
    if a == 0:
        for t in range(a, first):
            out[t] = vals[nc - 1]
    else:
        denom = first - (a - 1)
        for t in range(a, first):
            out[t] = vals[nc - 1] * (t - (a - 1)) / denom
    for ci in range(nc - 1, 0, -1):
        i = pos[ci]
        j = pos[ci - 1]
        vi = vals[ci]
        vj = vals[ci - 1]
        out[i] = vi
        denom = j - i
        for t in range(i + 1, j):
            out[t] = vi + (t - i) * (vj - vi) / denom
    last = pos[0]
    out[last] = vals[0]
    if b == Tp1:
        for t in range(last + 1, b):
            out[t] = vals[0]
    else:
        denom = b - last
        for t in range(last + 1, b):
            out[t] = vals[0] * (b - t) / denom
    return best


@njit(cache=True, nogil=True)
def v_tables(F, zok, barg):
    """Fixed-weight recursion over all segments.

    Costs are carried as (temporal cost, nonzero count) pairs so that q = 0
    arithmetic stays exact; comparisons use the combined value.  On a tie the
    zero-split branch wins (split index ascending), which keeps the
    reconstructed trajectory consistent with the reported objective.

    Returns (vsm, vct, vch): temporal part, count part, and the choice table
    (split index, or -1 for the all-charged segment branch).
    """
    B = F.shape[0] - 1
    vsm = np.zeros((B + 1, B + 1))
    vct = np.zeros((B + 1, B + 1), dtype=np.int64)
    vch = np.full((B + 1, B + 1), -2, dtype=np.int64)
    for L in range(1, B + 1):
        for a in range(0, B - L + 1):
            b = a + L
            fsm = F[a, b]
            fct = b - a
            fval = fsm + barg * fct
            ssm = np.inf
            sct = 0
            st = -1
            sval = np.inf
            for t in range(a, b):
                if zok[t]:
                    m = vsm[a, t] + vsm[t + 1, b]
                    c = vct[a, t] + vct[t + 1, b]
                    val = m + barg * c
                    if val < sval:
                        sval = val
                        ssm = m
                        sct = c
                        st = t
            if sval <= fval:
                vsm[a, b] = ssm
                vct[a, b] = sct
                vch[a, b] = st
            else:
                vsm[a, b] = fsm
                vct[a, b] = fct
                vch[a, b] = -1
    return vsm, vct, vch


@njit(cache=True, nogil=True)
def nu_tables(F, zpos):
    """Budgeted recursion: nu[b, k] = best temporal cost of [0, b) with at
    most k nonzeros and a pinned zero at b (when b <= T).

    zpos holds the ascending positions whose box contains zero.  For k >= b
    the budget is slack and nu[b, k] = F[0, b]; otherwise the recursion
    scans the largest zero position t, leaving b - t - 1 charged variables
    to its right (splits that overdraw the budget are skipped).  Choice
    codes: -1 slack budget, t >= 0 split at t, -2 infeasible.
    """
    B = F.shape[0] - 1
    nu = np.full((B + 1, B + 1), np.inf)
    ch = np.full((B + 1, B + 1), -2, dtype=np.int64)
    for k in range(B + 1):
        nu[0, k] = 0.0
    nz = zpos.shape[0]
    for b in range(1, B + 1):
        for k in range(B + 1):
            if k >= b:
                nu[b, k] = F[0, b]
                ch[b, k] = -1
            else:
                best = np.inf
                bt = -2
                for z in range(nz):
                    t = zpos[z]
                    if t >= b:
                        break
                    kk = k - (b - t - 1)
                    if kk < 0:
                        continue
                    c = nu[t, kk] + F[t + 1, b]
                    if c < best:
                        best = c
                        bt = t
                nu[b, k] = best
                ch[b, k] = bt
    return nu, ch
