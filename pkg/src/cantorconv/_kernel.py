"""Compiled streaming kernels for grid correlation sums and pair integrals.

Two strategies compute the cell masses of eta_s = law(X + lam*Y) on the
a^L grid.

The generic kernel walks the product-cylinder tree of mu_a x mu_b
depth-first, classifying each node's projected interval [v, v+w) against the
grid.  Nodes interior to a cell (after an outward float slack) contribute
their exact dyadic mass to that cell's lower and upper bounds; straddling
nodes are split until their width falls below a refinement floor, after
which their mass goes to the upper bound of every overlapped cell and
proportionally to a smooth uncertified estimate.

The aligned kernels apply when 1/a is an integer: every depth-L cylinder
of mu_a starts at an exact multiple of the cell width g = a^L, so the cell
masses are the convolution of an integer list of x positions with a sparse
vector of certified cell masses of g*mu_a + lam*mu_b.  That y vector comes
from a one-dimensional descent (cheap: cylinders at each depth are
disjoint, so straddlers never multiply) finished by exact evaluations of
the mu_a distribution function across cell boundaries.  conv_level streams
the sparse convolution through contiguous cell buckets; dp_profile instead
materializes a dense cell array and applies the x convolution as L in-place
shift-adds (the position set factors digitwise), which is much faster
whenever (1 + lam)/g cells fit in memory and yields every grid level
0..L in one pass.

The correlation kernel descends over pairs of product cylinders, comparing
the min/max distance of their projections with the radius r (closed balls).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_DMAX = 200
_STACK = 4096
_BUCKET = 1 << 22
_SLACK = 3e-14
_CONV_BB = 20  # bucket bits for the aligned kernel; 4^10 cells, 8 MB hot


@njit(cache=True, fastmath=True)
def _tau_level_impl(af, bf, lam, L, q, off, rc):
    g = af ** L
    ginv = 1.0 / g
    wfloor = g * 0.5 ** rc
    slc = _SLACK * ginv + 1e-4  # outward slack in cell units

    wx = np.empty(_DMAX)
    wy = np.empty(_DMAX)
    ox = np.empty(_DMAX)
    oy = np.empty(_DMAX)
    for d in range(_DMAX):
        wx[d] = af ** d
        wy[d] = lam * bf ** d
        ox[d] = (1.0 - af) * wx[d]
        oy[d] = (1.0 - bf) * wy[d]
    pw2 = np.empty(2 * _DMAX)
    for k in range(2 * _DMAX):
        pw2[k] = 0.5 ** k

    cmin = np.int64(math.floor(-off * ginv - slc))
    cmax = np.int64(math.floor((1.0 + lam - off) * ginv + slc))
    ncells = cmax - cmin + 1
    cb = min(ncells, _BUCKET)
    nbuckets = (ncells + cb - 1) // cb

    lo_a = np.zeros(cb)
    hi_a = np.zeros(cb)
    es_a = np.zeros(cb)
    touched = np.empty(cb, dtype=np.int64)
    seen = np.zeros(cb, dtype=np.uint8)

    sx = np.empty(_STACK)
    sy = np.empty(_STACK)
    sdx = np.empty(_STACK, dtype=np.int64)
    sdy = np.empty(_STACK, dtype=np.int64)

    tau_lo = 0.0
    tau_hi = 0.0
    tau_es = 0.0
    dumped = 0.0
    is_q2 = q == 2.0

    for bidx in range(nbuckets):
        c_start = cmin + bidx * cb
        c_end = min(cmax, c_start + cb - 1)
        blo_c = float(c_start)
        bhi_c = float(c_end + 1)
        tcount = 0

        sx[0] = 0.0
        sy[0] = 0.0
        sdx[0] = 0
        sdy[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            x = sx[sp]
            y = sy[sp]
            dx = sdx[sp]
            dy = sdy[sp]
            w = wx[dx] + wy[dy]
            t0 = (x + y - off) * ginv
            t1 = t0 + w * ginv
            if t0 >= bhi_c + slc or t1 <= blo_c - slc:
                continue
            q0 = np.int64(math.floor(t0 - slc))
            q1 = np.int64(math.floor(t1 + slc))
            if q0 == q1:
                if c_start <= q0 <= c_end:
                    loc = q0 - c_start
                    if seen[loc] == 0:
                        seen[loc] = 1
                        touched[tcount] = loc
                        tcount += 1
                    m = pw2[dx + dy]
                    lo_a[loc] += m
                    hi_a[loc] += m
                    es_a[loc] += m
            elif w > wfloor and dx + 1 < _DMAX and dy + 1 < _DMAX:
                if wx[dx] >= wy[dy]:
                    sx[sp] = x
                    sy[sp] = y
                    sdx[sp] = dx + 1
                    sdy[sp] = dy
                    sp += 1
                    sx[sp] = x + ox[dx]
                    sy[sp] = y
                    sdx[sp] = dx + 1
                    sdy[sp] = dy
                    sp += 1
                else:
                    sx[sp] = x
                    sy[sp] = y
                    sdx[sp] = dx
                    sdy[sp] = dy + 1
                    sp += 1
                    sx[sp] = x
                    sy[sp] = y + oy[dy]
                    sdx[sp] = dx
                    sdy[sp] = dy + 1
                    sp += 1
            else:
                m = pw2[dx + dy]
                dumped += m
                wc = t1 - t0
                c = q0
                while c <= q1:
                    if c_start <= c <= c_end:
                        loc = c - c_start
                        if seen[loc] == 0:
                            seen[loc] = 1
                            touched[tcount] = loc
                            tcount += 1
                        hi_a[loc] += m
                        ov_lo = t0 if t0 > c else float(c)
                        ov_hi = t1 if t1 < c + 1 else float(c + 1)
                        if ov_hi > ov_lo:
                            es_a[loc] += m * (ov_hi - ov_lo) / wc
                    c += 1

        for t in range(tcount):
            loc = touched[t]
            if is_q2:
                tau_lo += lo_a[loc] * lo_a[loc]
                tau_hi += hi_a[loc] * hi_a[loc]
                tau_es += es_a[loc] * es_a[loc]
            else:
                tau_lo += lo_a[loc] ** q
                tau_hi += hi_a[loc] ** q
                tau_es += es_a[loc] ** q
            lo_a[loc] = 0.0
            hi_a[loc] = 0.0
            es_a[loc] = 0.0
            seen[loc] = 0

    return tau_lo, tau_hi, tau_es, dumped


def tau_level(af: float, bf: float, lam: float, L: int, q: float,
              off: float, rc: int):
    """(tau_lo, tau_hi, tau_est, dumped straddler mass) at grid level L."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return _tau_level_impl(float(af), float(bf), float(lam), int(L),
                           float(q), float(off), int(rc))


# ---------------------------------------------------------------------------
# aligned kernel: 1/a integer
# ---------------------------------------------------------------------------

@njit(cache=True)
def _cantor_cdf(af, u):
    """F(u) = mu_a((-inf, u]) by digit descent; exact up to float rounding."""
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    acc = 0.0
    w = 1.0
    for _ in range(120):
        if u < af:
            u = u / af
            w *= 0.5
        elif u < 1.0 - af:
            return acc + 0.5 * w
        else:
            acc += 0.5 * w
            u = (u - (1.0 - af)) / af
            w *= 0.5
        if u <= 0.0:
            return acc
        if u >= 1.0:
            return acc + w
    return acc + 0.5 * w


@njit(cache=True)
def _w_cells_impl(af, bf, lam, g, off, rc, out_c, out_lo, out_hi):
    """Emit (cell, lo, hi) cell masses of W = g*X'' + lam*Y against the grid.

    X'' ~ mu_a, Y ~ mu_b independent.  The y tree is descended until a
    cylinder's width drops below the refinement floor; the leaf's interval
    then spans at most a couple of cells, and the x'' spread across each
    boundary resolves through the mu_a distribution function, evaluated at
    both endpoints of the leaf to keep certified lo/hi.  Returns the
    emission count, or -1 if the output buffers are too small.
    """
    ginv = 1.0 / g
    wfloor = g * 0.5 ** rc
    slc = _SLACK * ginv + 1e-9  # slack on cell-unit coordinates
    usl = 1e-11                 # extra slack on cdf arguments
    cap = out_c.shape[0]
    n_out = 0
    sy = np.empty(_STACK)
    sd = np.empty(_STACK, dtype=np.int64)
    sy[0] = 0.0
    sd[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        y = sy[sp]
        d = sd[sp]
        wy = lam * bf ** d
        if wy > wfloor and d + 1 < _DMAX:
            sy[sp] = y
            sd[sp] = d + 1
            sp += 1
            sy[sp] = y + (1.0 - bf) * wy
            sd[sp] = d + 1
            sp += 1
            continue
        m = 0.5 ** d
        # leaf: W restricted to this cylinder lies in [y, y + g + wy]
        t0 = (y - off) * ginv            # cell units
        t1 = t0 + 1.0 + wy * ginv
        q0 = np.int64(math.floor(t0 - slc))
        q1 = np.int64(math.floor(t1 + slc))
        c = q0
        while c <= q1:
            # mass in cell c: F(c+1 - t) - F(c - t) with t in [t0, t0+wy/g]
            tv = t0 + wy * ginv
            f_hi = (_cantor_cdf(af, (c + 1) - t0 + slc + usl)
                    - _cantor_cdf(af, c - tv - slc - usl))
            f_lo = (_cantor_cdf(af, (c + 1) - tv - slc - usl)
                    - _cantor_cdf(af, c - t0 + slc + usl))
            if f_lo < 0.0:
                f_lo = 0.0
            if f_hi > 0.0:
                if n_out >= cap:
                    return -1
                out_c[n_out] = c
                out_lo[n_out] = m * f_lo
                out_hi[n_out] = m * f_hi
                n_out += 1
            c += 1
    return n_out


def y_cells(af: float, bf: float, lam: float, g: float, off: float, rc: int):
    """Sorted sparse cell masses (cells, lo, hi) of g*mu_a + lam*mu_b."""
    d_b = math.log(2.0) / -math.log(bf)
    cap = 4096 + 16 * int(((lam + 1.0) / g) ** min(d_b, 0.95)
                          * 2.0 ** (d_b * rc))
    while True:
        out_c = np.empty(cap, dtype=np.int64)
        out_lo = np.empty(cap)
        out_hi = np.empty(cap)
        n = _w_cells_impl(float(af), float(bf), float(lam), float(g),
                          float(off), int(rc), out_c, out_lo, out_hi)
        if n >= 0:
            break
        cap *= 4
    c, lo, hi = out_c[:n], out_lo[:n], out_hi[:n]
    order = np.argsort(c, kind="stable")
    c, lo, hi = c[order], lo[order], hi[order]
    uc, idx = np.unique(c, return_index=True)
    return uc, np.add.reduceat(lo, idx), np.add.reduceat(hi, idx)


def x_positions(a_inv: int, L: int) -> np.ndarray:
    """Sorted cell indices of all depth-L cylinder left endpoints of mu_a.

    In units of g = a^L the left endpoint of the cylinder with digits u is
    sum_j u_j (a_inv - 1) a_inv^(L-j), an exact integer.
    """
    pos = np.zeros(1, dtype=np.int64)
    for d in range(L):
        pos = np.concatenate([pos, pos + (a_inv - 1) * a_inv ** (L - 1 - d)])
    pos.sort()
    return pos


@njit(cache=True, fastmath=True)
def _conv_level_impl(xpos, yc, ylo, yhi, cbase, ncells, q):
    CB = np.int64(1) << _CONV_BB
    if ncells < CB:
        CB = ncells
    nx = xpos.shape[0]
    ny = yc.shape[0]
    acc = np.zeros(2 * CB)
    ptr = np.zeros(nx, dtype=np.int64)
    tau_lo = 0.0
    tau_hi = 0.0
    tau_es = 0.0
    is_q2 = q == 2.0
    nbuckets = (ncells + CB - 1) // CB
    for bidx in range(nbuckets):
        B0 = cbase + bidx * CB
        B1 = B0 + CB
        for j in range(nx):
            xj = xpos[j]
            p = ptr[j]
            lo_t = B0 - xj
            hi_t = B1 - xj
            while p < ny and yc[p] < lo_t:
                p += 1
            ptr[j] = p
            base = 2 * (xj - B0)
            while p < ny and yc[p] < hi_t:
                k = base + 2 * yc[p]
                acc[k] += ylo[p]
                acc[k + 1] += yhi[p]
                p += 1
        for i in range(CB):
            h = acc[2 * i + 1]
            if h != 0.0:
                l = acc[2 * i]
                if is_q2:
                    tau_lo += l * l
                    tau_hi += h * h
                    mm = 0.5 * (l + h)
                    tau_es += mm * mm
                else:
                    tau_lo += l ** q
                    tau_hi += h ** q
                    tau_es += (0.5 * (l + h)) ** q
                acc[2 * i] = 0.0
                acc[2 * i + 1] = 0.0
    return tau_lo, tau_hi, tau_es


def conv_level(a_inv: int, bf: float, lam: float, L: int, q: float,
               off: float, rc: int):
    """(tau_lo, tau_hi, tau_est) at level L via the aligned convolution."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    g = (1.0 / a_inv) ** L
    yc, ylo, yhi = y_cells(1.0 / a_inv, bf, lam, g, off, rc)
    xpos = x_positions(a_inv, L)
    cbase = np.int64(yc[0])
    ncells = np.int64(yc[-1] + xpos[-1] - cbase + 1)
    lo, hi, es = _conv_level_impl(xpos, yc, ylo, yhi, cbase, ncells, float(q))
    scale = (0.5 ** L) ** float(q)
    return lo * scale, hi * scale, es * scale


@njit(cache=True, fastmath=True)
def _dp_shift_impl(vlo, vhi, a_inv, L):
    """In-place convolution with the x-atom positions, factored digitwise.

    The depth-L left endpoints of mu_a are sums of distinct shifts
    (a_inv-1)*a_inv^j, so convolving with their indicator is L binary
    shift-adds.  Descending index order keeps each pass reading
    pre-update values.
    """
    n = vlo.shape[0]
    for j in range(L):
        s = (a_inv - 1) * a_inv ** j
        if s >= n:
            continue
        for c in range(n - 1, s - 1, -1):
            vlo[c] += vlo[c - s]
            vhi[c] += vhi[c - s]


@njit(cache=True, fastmath=True)
def _dp_collapse_impl(vlo, vhi, n, cbase, a_inv, L, q, out):
    """Square-sum cell bounds at every level, collapsing a_inv children up.

    out[lev, :] receives the unnormalized (lo, hi, est) power sums at grid
    level lev; absolute cell indices keep parent grouping aligned even when
    cbase is negative (nonzero grid offset).
    """
    is_q2 = q == 2.0
    for lev in range(L, -1, -1):
        s_lo = 0.0
        s_hi = 0.0
        s_es = 0.0
        for i in range(n):
            l = vlo[i]
            h = vhi[i]
            if is_q2:
                s_lo += l * l
                s_hi += h * h
                mm = 0.5 * (l + h)
                s_es += mm * mm
            else:
                s_lo += l ** q
                s_hi += h ** q
                s_es += (0.5 * (l + h)) ** q
        out[lev, 0] = s_lo
        out[lev, 1] = s_hi
        out[lev, 2] = s_es
        if lev == 0:
            break
        new_base = cbase // a_inv  # floor division, correct for negative cbase
        new_n = -(-(cbase + n - new_base * a_inv) // a_inv)
        for i2 in range(new_n):
            j0 = (new_base + i2) * a_inv - cbase
            al = 0.0
            ah = 0.0
            for t in range(a_inv):
                j = j0 + t
                if 0 <= j < n:
                    al += vlo[j]
                    ah += vhi[j]
            vlo[i2] = al
            vhi[i2] = ah
        n = new_n
        cbase = new_base


def dp_profile(a_inv: int, bf: float, lam: float, L: int, q: float,
               off: float, rc: int):
    """(lo, hi, est) arrays over grid levels 0..L via the dense shift DP.

    Memory scales with (1 + lam) * a_inv**L cells; callers should check
    dp_cell_count first and fall back to conv_level / tau_level when it is
    too large.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    g = (1.0 / a_inv) ** L
    yc, ylo, yhi = y_cells(1.0 / a_inv, bf, lam, g, off, rc)
    cbase = int(yc[0])
    xmax = a_inv ** L - 1  # sum of all shifts (a_inv-1)*a_inv^j
    n = int(yc[-1]) - cbase + xmax + 1
    vlo = np.zeros(n)
    vhi = np.zeros(n)
    idx = (yc - cbase).astype(np.int64)
    np.add.at(vlo, idx, ylo)
    np.add.at(vhi, idx, yhi)
    _dp_shift_impl(vlo, vhi, a_inv, L)
    out = np.zeros((L + 1, 3))
    _dp_collapse_impl(vlo, vhi, n, cbase, a_inv, L, float(q), out)
    scale = (0.5 ** L) ** float(q)
    return out[:, 0] * scale, out[:, 1] * scale, out[:, 2] * scale


def dp_cell_count(a_inv: int, lam: float, L: int) -> int:
    """Dense array length the shift DP would need."""
    return int((1.0 + lam) * a_inv ** L) + 2


@njit(cache=True)
def _corr_impl(af, bf, lam, r, wfloor):
    wx = np.empty(_DMAX)
    wy = np.empty(_DMAX)
    ox = np.empty(_DMAX)
    oy = np.empty(_DMAX)
    for d in range(_DMAX):
        wx[d] = af ** d
        wy[d] = lam * bf ** d
        ox[d] = (1.0 - af) * wx[d]
        oy[d] = (1.0 - bf) * wy[d]
    pw2 = np.empty(2 * _DMAX)
    for k in range(2 * _DMAX):
        pw2[k] = 0.5 ** k
    sl = _SLACK

    n8 = _STACK * 4
    st = np.empty((n8, 4))       # x1, y1, x2, y2
    sd = np.empty((n8, 4), dtype=np.int64)  # dx1, dy1, dx2, dy2
    st[0, 0] = 0.0
    st[0, 1] = 0.0
    st[0, 2] = 0.0
    st[0, 3] = 0.0
    sd[0, 0] = 0
    sd[0, 1] = 0
    sd[0, 2] = 0
    sd[0, 3] = 0
    sp = 1
    lo = 0.0
    hi = 0.0
    while sp > 0:
        sp -= 1
        x1 = st[sp, 0]
        y1 = st[sp, 1]
        x2 = st[sp, 2]
        y2 = st[sp, 3]
        d1x = sd[sp, 0]
        d1y = sd[sp, 1]
        d2x = sd[sp, 2]
        d2y = sd[sp, 3]
        v1 = x1 + y1
        w1 = wx[d1x] + wy[d1y]
        v2 = x2 + y2
        w2 = wx[d2x] + wy[d2y]
        dmin = v2 - (v1 + w1)
        t = v1 - (v2 + w2)
        if t > dmin:
            dmin = t
        if dmin < 0.0:
            dmin = 0.0
        dmax = (v2 + w2) - v1
        t = (v1 + w1) - v2
        if t > dmax:
            dmax = t
        m = pw2[d1x + d1y + d2x + d2y]
        if dmax <= r - sl:
            lo += m
            hi += m
        elif dmin > r + sl:
            continue
        elif w1 <= wfloor and w2 <= wfloor:
            hi += m
        else:
            # split the wider of the two nodes, preferring node 1 on ties
            split_first = w1 >= w2
            if split_first:
                if wx[d1x] >= wy[d1y] and d1x + 1 < _DMAX:
                    for k in range(2):
                        st[sp, 0] = x1 + (ox[d1x] if k == 1 else 0.0)
                        st[sp, 1] = y1
                        st[sp, 2] = x2
                        st[sp, 3] = y2
                        sd[sp, 0] = d1x + 1
                        sd[sp, 1] = d1y
                        sd[sp, 2] = d2x
                        sd[sp, 3] = d2y
                        sp += 1
                else:
                    for k in range(2):
                        st[sp, 0] = x1
                        st[sp, 1] = y1 + (oy[d1y] if k == 1 else 0.0)
                        st[sp, 2] = x2
                        st[sp, 3] = y2
                        sd[sp, 0] = d1x
                        sd[sp, 1] = d1y + 1
                        sd[sp, 2] = d2x
                        sd[sp, 3] = d2y
                        sp += 1
            else:
                if wx[d2x] >= wy[d2y] and d2x + 1 < _DMAX:
                    for k in range(2):
                        st[sp, 0] = x1
                        st[sp, 1] = y1
                        st[sp, 2] = x2 + (ox[d2x] if k == 1 else 0.0)
                        st[sp, 3] = y2
                        sd[sp, 0] = d1x
                        sd[sp, 1] = d1y
                        sd[sp, 2] = d2x + 1
                        sd[sp, 3] = d2y
                        sp += 1
                else:
                    for k in range(2):
                        st[sp, 0] = x1
                        st[sp, 1] = y1
                        st[sp, 2] = x2
                        st[sp, 3] = y2 + (oy[d2y] if k == 1 else 0.0)
                        sd[sp, 0] = d1x
                        sd[sp, 1] = d1y
                        sd[sp, 2] = d2x
                        sd[sp, 3] = d2y + 1
                        sp += 1
    return lo, hi


def corr_pairs(af: float, bf: float, lam: float, r: float,
               rel_floor: float = 1.0 / 32.0):
    """Certified (lo, hi) of P(|Z - Z'| <= r) for Z, Z' iid eta_s.

    Pairs whose interval distance straddles r are refined until both widths
    drop below r * rel_floor; the unresolved mass lands in hi only.  The
    float slack makes the closed-ball boundary conservative in both
    directions.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    return _corr_impl(float(af), float(bf), float(lam), float(r),
                      float(r) * float(rel_floor))
