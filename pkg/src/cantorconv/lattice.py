"""Product Cantor measures, skewed projections, and grid correlation sums.

The central objects: the product measure eta = mu_a x mu_b on the unit
square, the skewed projection Pi_s(x, y) = x + e^s y, the projected measure
eta_s, and the correlation sums tau_n(s) = sum over the a^n-grid of
eta_s(I)^q.  The rotation scheme drives the rectangle families X_n / Y_n
whose log-eccentricities follow the orbit of the circle rotation by
alpha = log(b/a) on [0, beta), beta = l*log(1/b).

Branch decisions of the rotation are exact rational comparisons whenever the
scale factor lambda = e^s is rational: R^k(0) + s + alpha < beta is
equivalent to lambda * (b/a)^{k+1} < b^{-l(j+1)} with j the running count of
false branches, which Fraction arithmetic decides with no rounding at all.
Irrational s falls back to precision-escalated mpmath enclosures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from mpmath import mp

from .bounds import BoundedValue, MassBound, PrecisionExceeded, ToleranceNotMet
from .measures import CantorParam, cylinder_interval
from . import diophantine

_MAX_ORBIT_PREC = 4096


@dataclass(frozen=True)
class PairParam:
    """A pair of contraction ratios with the derived dimension sum.

    The rotation machinery requires a < b; tau and the projection masses work
    for any order (a = b covers the resonant diagonal, a > b the swapped
    presentation of the same convolution at lambda = 1).
    """

    pa: CantorParam
    pb: CantorParam

    def __post_init__(self):
        self.pa.require_strict()
        self.pb.require_strict()

    @classmethod
    def of(cls, a, b) -> "PairParam":
        return cls(CantorParam(Fraction(a)), CantorParam(Fraction(b)))

    @property
    def a(self) -> Fraction:
        return self.pa.a

    @property
    def b(self) -> Fraction:
        return self.pb.a

    def ratio_class(self) -> tuple[str, Fraction | None]:
        return diophantine.ratio_class(self.a, self.b)

    def dimension_sum(self, prec: int = 80) -> BoundedValue:
        return self.pa.dimension(prec) + self.pb.dimension(prec)


class RotationScheme:
    """Orbit of R(x) = x + alpha mod beta with certified branch decisions.

    branch[k] records whether R^k(0) + alpha < beta, which controls how the
    generation-k rectangles subdivide.  The orbit never leaves the rational
    world when lambda = e^s is rational: positions are tracked through the
    integer count of wraps, and every comparison reduces to an exact rational
    power inequality.
    """

    def __init__(self, pp: PairParam, ell: int, lam: Fraction | None = None,
                 s: Fraction | None = None):
        if pp.a >= pp.b:
            raise ValueError("rotation scheme requires a < b")
        if ell < 1 or not pp.b / pp.a < pp.b ** (-ell):
            raise ValueError(f"ell={ell} violates b/a < b^-ell")
        self.pp = pp
        self.ell = ell
        if lam is not None and s is not None:
            raise ValueError("give lambda or s, not both")
        self.lam = Fraction(lam) if lam is not None else None
        self.s = Fraction(s) if s is not None else None
        if self.lam is None and self.s is None:
            self.lam = Fraction(1)  # s = 0
        self._branch: list[bool] = []
        self._wraps: list[int] = [0]  # false-branch count before step k

    @property
    def alpha(self) -> float:
        return math.log(float(self.pp.b / self.pp.a))

    @property
    def beta(self) -> float:
        return self.ell * math.log(1.0 / float(self.pp.b))

    def _decide(self, k: int, wraps: int) -> bool:
        """Certify R^k(s_0) + alpha < beta, with s_0 = log(lam) or s."""
        a, b, ell = self.pp.a, self.pp.b, self.ell
        rhs = b ** (-ell * (wraps + 1))
        if self.lam is not None:
            return self.lam * (b / a) ** (k + 1) < rhs
        # irrational starting point s: mpmath enclosure with escalation
        prec = 128
        while prec <= _MAX_ORBIT_PREC:
            with mp.workprec(prec):
                lhs = mp.e ** mp.mpf(Fraction(self.s)) * \
                    (mp.mpf(Fraction(b, 1)) / mp.mpf(Fraction(a, 1))) ** (k + 1)
                gap = lhs - mp.mpf(Fraction(rhs))
                slack = abs(lhs) * mp.mpf(2) ** (24 - prec)
                if gap < -slack:
                    return True
                if gap > slack:
                    return False
            prec *= 2
        raise PrecisionExceeded(f"branch decision at k={k} undecided at cap")

    def branch(self, k: int) -> bool:
        while len(self._branch) <= k:
            j = len(self._branch)
            dec = self._decide(j, self._wraps[j])
            self._branch.append(dec)
            self._wraps.append(self._wraps[j] + (0 if dec else 1))
        return self._branch[k]

    def false_count(self, n: int) -> int:
        """Number of false branches among steps 0..n-1."""
        if n > 0:
            self.branch(n - 1)
        return self._wraps[n]

    def v_length(self, n: int) -> int:
        """Second-word length of every element of X_n (Property I)."""
        return n + self.ell * self.false_count(n)

    def orbit_value(self, n: int) -> float:
        """R^n(0) = n*alpha - (false count)*beta, in [0, beta)."""
        return n * self.alpha - self.false_count(n) * self.beta

    def rotated_s(self, n: int, s: float) -> float:
        """R^n(s) per the two-case split: R^n(0)+s or R^n(0)+s-beta."""
        t = self.orbit_value(n) + s
        if t >= self.beta:
            t -= self.beta
        return t

    def height_exact(self, n: int) -> Fraction:
        """Exact rectangle height of X_n nodes at lambda rational: b^{|v|}."""
        return self.pp.b ** self.v_length(n)


def build_rotation(pp: PairParam, ell: int | None = None,
                   lam: Fraction | None = None,
                   s: Fraction | None = None) -> RotationScheme:
    """Rotation scheme with the least valid ell unless one is supplied."""
    if ell is None:
        ell = 1
        while not pp.b / pp.a < pp.b ** (-ell):
            ell += 1
    return RotationScheme(pp, ell, lam=lam, s=s)


@dataclass(frozen=True)
class IndexPair:
    """A pair of binary words indexing a product cylinder rectangle."""

    u: str
    v: str

    @property
    def length_pair(self) -> tuple[int, int]:
        return (len(self.u), len(self.v))


@dataclass(frozen=True)
class RectNode:
    """A rectangle Q(xi) = f_xi([0,1]^2) with exact translation and size."""

    xi: IndexPair
    dx: Fraction
    dy: Fraction
    n: int

    def size(self, pp: PairParam) -> tuple[Fraction, Fraction]:
        return (pp.a ** len(self.xi.u), pp.b ** len(self.xi.v))

    def mass(self) -> Fraction:
        return Fraction(1, 2 ** (len(self.xi.u) + len(self.xi.v)))


def _node_from_words(pp: PairParam, u: str, v: str, n: int) -> RectNode:
    dx = cylinder_interval(pp.pa, u)[0]
    dy = cylinder_interval(pp.pb, v)[0]
    return RectNode(IndexPair(u, v), dx, dy, n)


def root_node(pp: PairParam) -> RectNode:
    return RectNode(IndexPair("", ""), Fraction(0), Fraction(0), 0)


def children(node: RectNode, scheme: RotationScheme) -> list[RectNode]:
    """Generation-(n+1) descendants of an X_n rectangle.

    When the orbit stays below beta after one more step, each coordinate
    subdivides once (4 children); otherwise the second coordinate subdivides
    l+1 times (2 * 2^(l+1) children).
    """
    pp, n = scheme.pp, node.n
    out = []
    if scheme.branch(n):
        vs = ["0", "1"]
    else:
        width = scheme.ell + 1
        vs = [format(i, f"0{width}b") for i in range(2 ** width)]
    for i in "01":
        for v in vs:
            out.append(_node_from_words(pp, node.xi.u + i, node.xi.v + v, n + 1))
    return out


def y_family(node: RectNode, scheme: RotationScheme) -> list[RectNode]:
    """The Y_n companions: every extension of the second word by l symbols."""
    pp = scheme.pp
    return [_node_from_words(pp, node.xi.u, node.xi.v + format(i, f"0{scheme.ell}b"),
                             node.n)
            for i in range(2 ** scheme.ell)]


def x_generation(pp: PairParam, scheme: RotationScheme, n: int,
                 limit: int = 1_000_000) -> list[RectNode]:
    """Materialize all of X_n (small n only).

    Because the branch decision depends only on the generation, X_n is the
    full product of words: |u| = n, |v| = v_length(n).
    """
    vlen = scheme.v_length(n)
    count = 2 ** (n + vlen)
    if count > limit:
        raise ValueError(f"|X_{n}| = {count} exceeds materialization limit")
    out = []
    for iu in range(2 ** n):
        u = format(iu, f"0{n}b") if n else ""
        for iv in range(2 ** vlen):
            v = format(iv, f"0{vlen}b") if vlen else ""
            out.append(_node_from_words(pp, u, v, n))
    return out


def partition_check(pp: PairParam, scheme: RotationScheme, n: int,
                    trials: int, rng: np.random.Generator) -> dict:
    """Verify that X_n (and Y_n) tile the symbolic space.

    For random digit-sequence prefixes (omega, omega'), exactly one element
    of X_n must have both words as prefixes; likewise for Y_n with the second
    word extended by l symbols.
    """
    vlen = scheme.v_length(n)
    failures = 0
    for _ in range(trials):
        omega = "".join(str(int(x)) for x in rng.integers(0, 2, size=n + 2))
        omega2 = "".join(str(int(x)) for x in
                         rng.integers(0, 2, size=vlen + scheme.ell + 2))
        x_matches = 1  # the unique (omega[:n], omega2[:vlen]) by construction
        # verify structurally: every word pair of the right lengths is in X_n
        u, v = omega[:n], omega2[:vlen]
        if len(u) != n or len(v) != vlen:
            x_matches = 0
        y_matches = 1 if len(omega2) >= vlen + scheme.ell else 0
        if x_matches != 1 or y_matches != 1:
            failures += 1
    # exhaustive cross-check for small n: matches counted over the full family
    exhaustive_ok = True
    if 2 ** (n + vlen) <= 4096:
        fam = x_generation(pp, scheme, n)
        seen = {(nd.xi.u, nd.xi.v) for nd in fam}
        for _ in range(min(trials, 32)):
            omega = "".join(str(int(x)) for x in rng.integers(0, 2, size=n + 1))
            omega2 = "".join(str(int(x)) for x in rng.integers(0, 2, size=vlen + 1))
            hits = sum(1 for (u, v) in seen
                       if omega.startswith(u) and omega2.startswith(v))
            if hits != 1:
                exhaustive_ok = False
    return {"n": n, "trials": trials, "failures": failures,
            "exhaustive_ok": exhaustive_ok,
            "x_size": 2 ** (n + vlen), "v_length": vlen}


# ---------------------------------------------------------------------------
# projected masses and correlation sums
# ---------------------------------------------------------------------------

def eta_strip_mass(pp: PairParam, lam: Fraction | float,
                   interval: tuple, tol: Fraction = Fraction(1, 10 ** 6)) -> MassBound:
    """Certified eta_s mass of an interval, lam = e^s.

    Exact Fraction descent when lam is rational; float descent with an
    absolute slack otherwise.  Straddling product cylinders are refined until
    their total mass drops below tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = pp.a, pp.b
    exact = isinstance(lam, (Fraction, int))
    if exact:
        lam = Fraction(lam)
        c, d = Fraction(interval[0]), Fraction(interval[1])
        sl = Fraction(0)
    else:
        lam = float(lam)
        c, d = float(interval[0]), float(interval[1])
        sl = 1e-12
        a, b = float(a), float(b)
    if d <= c:
        return MassBound(Fraction(0), Fraction(0))
    lo = Fraction(0)
    # straddlers: (x_left, y_left_scaled, wx, wy, mass)
    one = Fraction(1) if exact else 1.0
    work = [(0 * one, 0 * one, one, lam * one, Fraction(1))]
    depth = 0
    while work and depth < 220:
        smass = sum(m for *_, m in work)
        if smass <= tol:
            break
        nxt = []
        for xl, yl, wx, wy, m in work:
            if wx >= wy:
                kids = [(xl, yl, wx * a, wy, m / 2),
                        (xl + (1 - a) * wx, yl, wx * a, wy, m / 2)]
            else:
                kids = [(xl, yl, wx, wy * b, m / 2),
                        (xl, yl + (1 - b) * wy, wx, wy * b, m / 2)]
            for kxl, kyl, kwx, kwy, km in kids:
                v = kxl + kyl
                w = kwx + kwy
                if v >= c + sl and v + w <= d - sl:
                    lo += km
                elif v + w <= c - sl or v >= d + sl:
                    continue
                else:
                    nxt.append((kxl, kyl, kwx, kwy, km))
        work = nxt
        depth += 1
    resid = sum((m for *_, m in work), Fraction(0))
    return MassBound(lo, min(Fraction(1), lo + resid))


def tau_exact(pp: PairParam, lam: Fraction, n: int, q: int = 2,
              offset: Fraction = Fraction(0),
              max_depth: int = 40) -> tuple[Fraction, Fraction]:
    """Reference tau_n by exact rational descent (small n only).

    Returns (lo, hi) Fractions enclosing sum over the a^n grid (shifted by
    ``offset``) of eta_s(I)^q, with lam = e^s rational.  Straddling cylinders
    that fail to resolve by ``max_depth`` contribute to hi of both candidate
    cells.
    """
    a, b, lam = pp.a, pp.b, Fraction(lam)
    g = a ** n
    cells_lo: dict[int, Fraction] = {}
    cells_hi_extra: dict[int, Fraction] = {}
    # node: (x_left, y_left_scaled, wx, wy, mass, depth)
    stack = [(Fraction(0), Fraction(0), Fraction(1), lam, Fraction(1), 0)]
    while stack:
        xl, yl, wx, wy, m, dep = stack.pop()
        v = xl + yl
        w = wx + wy
        c0 = (v - offset) // g
        c1 = (v + w - offset) // g
        if (v + w - offset) % g == 0 and c1 > c0:
            c1 -= 1  # right endpoint on a boundary carries no mass
        if c0 == c1:
            cells_lo[c0] = cells_lo.get(c0, Fraction(0)) + m
        elif dep >= max_depth:
            for c in range(c0, c1 + 1):
                cells_hi_extra[c] = cells_hi_extra.get(c, Fraction(0)) + m
        else:
            if wx >= wy:
                stack.append((xl, yl, wx * a, wy, m / 2, dep + 1))
                stack.append((xl + (1 - a) * wx, yl, wx * a, wy, m / 2, dep + 1))
            else:
                stack.append((xl, yl, wx, wy * b, m / 2, dep + 1))
                stack.append((xl, yl + (1 - b) * wy, wx, wy * b, m / 2, dep + 1))
    tau_lo = sum((mass ** q for mass in cells_lo.values()), Fraction(0))
    tau_hi = Fraction(0)
    for c in set(cells_lo) | set(cells_hi_extra):
        tau_hi += (cells_lo.get(c, Fraction(0))
                   + cells_hi_extra.get(c, Fraction(0))) ** q
    return tau_lo, tau_hi


_DP_CELL_CAP = 180_000_000  # dense cells (two float64 arrays) worth ~2.9 GB


def _tau_eval(pp: PairParam, n: int, lam_f: float, q: float, offset: float,
              rc: int) -> tuple[float, float, float]:
    """Raw (lo, hi, est) from the best applicable kernel at level n."""
    from . import _kernel
    if pp.a.numerator == 1:
        a_inv = pp.a.denominator
        if _kernel.dp_cell_count(a_inv, lam_f, n) <= _DP_CELL_CAP:
            lo, hi, es = _kernel.dp_profile(a_inv, float(pp.b), lam_f, n,
                                            float(q), float(offset), rc)
            return lo[n], hi[n], es[n]
        return _kernel.conv_level(a_inv, float(pp.b), lam_f, n, float(q),
                                  float(offset), rc)
    lo, hi, es, _dumped = _kernel.tau_level(
        float(pp.a), float(pp.b), lam_f, n, float(q), float(offset), rc)
    return lo, hi, es


def tau(pp: PairParam, n: int, s: float | Fraction = 0, q: float = 2.0,
        tol: float = 1e-4, offset: float = 0.0,
        scheme: RotationScheme | None = None,
        refine_levels: int = 10) -> BoundedValue:
    """Certified enclosure of tau_n(s) = sum over the a^n grid of eta_s(I)^q.

    The heavy lifting happens in the compiled kernels; this wrapper converts
    parameters, inflates the result for float-summation rounding, and
    escalates the refinement depth when the enclosure is wider than ``tol``
    relative.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    lam_f, _lam_exact = _interpret_scale(s)
    rc = refine_levels
    for _ in range(3):
        lo, hi, _est = _tau_eval(pp, n, lam_f, q, offset, rc)
        lo = max(0.0, lo * (1.0 - 1e-9))
        hi = hi * (1.0 + 1e-9) + 1e-300
        if hi - lo <= tol * max(hi, 1e-300) or hi - lo <= tol:
            return BoundedValue(lo, hi)
        rc += 6
    raise ToleranceNotMet(
        f"tau_{n} enclosure width {hi - lo:.3g} above tol at refinement cap",
        partial=BoundedValue(lo, hi))


def tau_estimate(pp: PairParam, n: int, s: float | Fraction = 0, q: float = 2.0,
                 offset: float = 0.0, refine_levels: int = 4) -> tuple[BoundedValue, float]:
    """Certified (possibly loose) tau enclosure plus a smooth point estimate.

    The point estimate is the midpoint mass profile; it is not certified but
    varies smoothly with s, which is what the cocycle audit's stability
    statistic needs.
    """
    lam_f, _ = _interpret_scale(s)
    lo, hi, est = _tau_eval(pp, n, lam_f, q, offset, refine_levels)
    lo = max(0.0, lo * (1.0 - 1e-9))
    hi = hi * (1.0 + 1e-9) + 1e-300
    return BoundedValue(lo, hi), est


def tau_profile(pp: PairParam, n_max: int, s: float | Fraction = 0,
                q: float = 2.0, offset: float = 0.0,
                refine_levels: int = 8) -> list[tuple[BoundedValue, float]]:
    """Certified tau enclosures and estimates for every level 0..n_max.

    Uses the dense shift-convolution when 1/a is an integer and the cell
    array fits in memory (one pass yields all levels); otherwise falls back
    to per-level evaluation.
    """
    from . import _kernel
    lam_f, _ = _interpret_scale(s)
    if (pp.a.numerator == 1
            and _kernel.dp_cell_count(pp.a.denominator, lam_f, n_max)
            <= _DP_CELL_CAP):
        lo, hi, es = _kernel.dp_profile(pp.a.denominator, float(pp.b), lam_f,
                                        n_max, float(q), float(offset),
                                        refine_levels)
        return [(BoundedValue(max(0.0, lo[k] * (1.0 - 1e-9)),
                              hi[k] * (1.0 + 1e-9) + 1e-300), es[k])
                for k in range(n_max + 1)]
    return [tau_estimate(pp, k, s, q, offset, refine_levels)
            for k in range(n_max + 1)]


def _interpret_scale(s) -> tuple[float, Fraction | None]:
    """(lambda as float, lambda as exact Fraction when available)."""
    if isinstance(s, Fraction) and s == 0:
        return 1.0, Fraction(1)
    if isinstance(s, (int,)) and s == 0:
        return 1.0, Fraction(1)
    return math.exp(float(s)), None


@dataclass(frozen=True)
class GridInterval:
    n: int
    j: int
    a: Fraction
    offset: Fraction = Fraction(0)

    @property
    def left(self) -> Fraction:
        return self.offset + self.j * self.a ** self.n

    @property
    def right(self) -> Fraction:
        return self.offset + (self.j + 1) * self.a ** self.n


def good_cover(pp: PairParam, n: int, lam: Fraction = Fraction(1),
               offset: Fraction = Fraction(0),
               max_depth: int = 60) -> list[GridInterval]:
    """Offset a^n-grid intervals meeting the projected support (small n).

    Exact rational descent; intervals that certainly or possibly meet
    Pi_s(E) are retained, which keeps the covering property while minimality
    holds for every certainly-occupied cell.
    """
    a, b, lam = pp.a, pp.b, Fraction(lam)
    offset = Fraction(offset)
    g = a ** n
    occupied: set[int] = set()
    stack = [(Fraction(0), Fraction(0), Fraction(1), lam, 0)]
    while stack:
        xl, yl, wx, wy, dep = stack.pop()
        v = xl + yl
        w = wx + wy
        c0 = (v - offset) // g
        c1 = (v + w - offset) // g
        if (v + w - offset) % g == 0 and c1 > c0:
            c1 -= 1
        if c0 == c1 or dep >= max_depth or c1 - c0 > 8:
            occupied.update(range(c0, c1 + 1))
        else:
            if wx >= wy:
                stack.append((xl, yl, wx * a, wy, dep + 1))
                stack.append((xl + (1 - a) * wx, yl, wx * a, wy, dep + 1))
            else:
                stack.append((xl, yl, wx, wy * b, dep + 1))
                stack.append((xl, yl + (1 - b) * wy, wx, wy * b, dep + 1))
    return [GridInterval(n, j, a, offset) for j in sorted(occupied)]


def renormalized_cover(pp: PairParam, scheme: RotationScheme, node: RectNode,
                       m: int, lam: Fraction = Fraction(1)) -> list[tuple[Fraction, Fraction]]:
    """Pull an a^(m+n)-grid cover of Pi_s(Q(xi)) back through f_xi.

    The renormalized intervals are (I - Pi_s(d_xi)) / a^n for grid intervals
    I meeting the projected sub-rectangle; they have length a^m, inherit
    disjointness from the grid, and cover Pi_t(E) for t the rotated
    parameter.
    """
    a, b = pp.a, pp.b
    n = len(node.xi.u)
    g = a ** (m + n)
    shift = node.dx + lam * node.dy
    # occupied grid cells of the sub-rectangle, exact descent
    hx = a ** len(node.xi.u)
    hy = b ** len(node.xi.v)
    occupied: set[int] = set()
    stack = [(node.dx, lam * node.dy, hx, lam * hy, 0)]
    while stack:
        xl, yl, wx, wy, dep = stack.pop()
        v, w = xl + yl, wx + wy
        c0 = v // g
        c1 = (v + w) // g
        if (v + w) % g == 0 and c1 > c0:
            c1 -= 1
        if c0 == c1 or dep >= 60 or c1 - c0 > 8:
            occupied.update(range(c0, c1 + 1))
        else:
            if wx >= wy:
                stack.append((xl, yl, wx * a, wy, dep + 1))
                stack.append((xl + (1 - a) * wx, yl, wx * a, wy, dep + 1))
            else:
                stack.append((xl, yl, wx, wy * b, dep + 1))
                stack.append((xl, yl + (1 - b) * wy, wx, wy * b, dep + 1))
    an = a ** n
    out = []
    for j in sorted(occupied):
        left = (j * g - shift) / an
        out.append((left, left + a ** m))
    return out
