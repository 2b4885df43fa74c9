"""Fourier transforms of recentred Cantor measures as certified cosine products.

The recentred measure mu_t is the law of sum_{j>=0} eps_j t^j with fair signs
eps_j = +-1, so its transform is the cosine product  F(mu_t)(xi) =
prod_{j>=0} cos(t^j xi).  The transform of the scaled convolution is
Phi(xi) = F(mu_a)(xi) * F(mu_b)(lambda xi) = Phi1 * Phi2, and the non-decay
scan evaluates |Phi| along the geometric frequency sequence xi = pi a^{-N}.

Arguments of the form pi * (rational) are carried symbolically: the rational
multiplier is reduced mod 2 exactly before any floating-point cosine is
taken, so frequencies like pi * 4^16 cost nothing in precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp

from .algebraic import PisotCertificate, power_distance
from .bounds import BoundedValue, PrecisionExceeded

_PREC_CAP = 4096


@dataclass(frozen=True)
class RecentredMeasure:
    """Sign-symmetric Cantor measure with contraction t; support half-width 1/(1-t)."""

    t: Fraction

    def __post_init__(self):
        t = Fraction(self.t)
        object.__setattr__(self, "t", t)
        if not Fraction(0) < t < Fraction(1):
            raise ValueError(f"t must be in (0,1), got {t}")

    @property
    def support_halfwidth(self) -> Fraction:
        return 1 / (1 - self.t)


@dataclass(frozen=True)
class PiMultiple:
    """Frequency xi = q * pi with exact rational q."""

    q: Fraction

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q))

    def __abs__(self) -> "PiMultiple":
        return PiMultiple(abs(self.q))

    def scaled(self, c: Fraction) -> "PiMultiple":
        return PiMultiple(self.q * Fraction(c))

    @property
    def approx(self) -> float:
        return float(self.q) * math.pi


Frequency = PiMultiple | float | Fraction | BoundedValue


@dataclass(frozen=True)
class ProductValue:
    """Certified cosine-product value with its truncation bookkeeping."""

    value: BoundedValue
    J: int                 # number of explicitly multiplied factors
    tail_bound: float      # T with tail factor in [exp(-T), 1]
    zero_flag: bool = False

    @property
    def lo(self):
        return self.value.lo

    @property
    def hi(self):
        return self.value.hi


def _cos_pi_rational(q: Fraction, prec: int) -> BoundedValue:
    """Enclosure of cos(pi * q) after exact reduction of q mod 2.

    Integer and half-integer multipliers are recognized exactly and give
    +-1 / 0 with zero width.
    """
    q = q % 2  # exact Fraction reduction into [0, 2)
    if q.denominator == 1:
        return BoundedValue.exact(1 if q == 0 else -1)
    if q.denominator == 2:
        return BoundedValue.exact(0)
    with mp.workprec(prec):
        v = mp.cospi(mp.mpf(q.numerator) / mp.mpf(q.denominator))
        eps = mp.mpf(2) ** (8 - prec)
        return BoundedValue(float(v - eps), float(v + eps))


def _cos_enclosure(x: BoundedValue, prec: int) -> BoundedValue:
    """Enclosure of cos over a real interval via the |cos'| <= 1 bound."""
    with mp.workprec(prec):
        clo = mp.cos(mp.mpf(x.lo))
        chi = mp.cos(mp.mpf(x.hi))
        w = mp.mpf(x.hi) - mp.mpf(x.lo)
        eps = mp.mpf(2) ** (8 - prec)
        lo = min(clo, chi) - w - eps
        hi = max(clo, chi) + w + eps
        return BoundedValue(max(-1.0, float(lo)), min(1.0, float(hi)))


def _factor(t: Fraction, j: int, xi: Frequency, prec: int) -> BoundedValue:
    """Enclosure of cos(t^j * xi)."""
    if isinstance(xi, PiMultiple):
        return _cos_pi_rational(xi.q * t**j, prec)
    if isinstance(xi, BoundedValue):
        s = t**j
        return _cos_enclosure(BoundedValue(float(xi.lo) * float(s) - 1e-13,
                                           float(xi.hi) * float(s) + 1e-13), prec)
    x = float(Fraction(xi) * t**j) if isinstance(xi, Fraction) else float(xi) * float(t) ** j
    return _cos_enclosure(BoundedValue(x - 1e-12 * (1 + abs(x)),
                                       x + 1e-12 * (1 + abs(x))), prec)


def _log_abs_xi(xi: Frequency) -> float:
    """log |xi|, computed without overflow for huge rational pi-multiples."""
    if isinstance(xi, PiMultiple):
        q = abs(xi.q)
        if q == 0:
            return -math.inf
        return (math.log(math.pi) + math.log(q.numerator)
                - math.log(q.denominator))
    if isinstance(xi, BoundedValue):
        m = max(abs(float(xi.lo)), abs(float(xi.hi)))
        return math.log(m) if m > 0 else -math.inf
    v = abs(Fraction(xi)) if isinstance(xi, Fraction) else abs(float(xi))
    if v == 0:
        return -math.inf
    if isinstance(v, Fraction):
        return math.log(v.numerator) - math.log(v.denominator)
    return math.log(v)


def mu_hat(m: RecentredMeasure, xi: Frequency, tol: float = 1e-12) -> ProductValue:
    """Certified value of F(mu_t)(xi) = prod_{j>=0} cos(t^j xi).

    The product is truncated at the first J with t^J |xi| <= 1/2; the tail
    factor lies in [exp(-T), 1] with T = (t^{J} xi)^2 / (1 - t^2) from
    |ln cos x| <= x^2 on |x| <= 1/2.  The factor count comes from log-space
    arithmetic, so frequencies with thousands of digits cost nothing extra.
    Precision escalates until the enclosure width is below ``tol`` or the
    bit cap is reached; a still-wide enclosure is returned as-is (never
    silently signed).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    t = m.t
    tf = float(t)
    lxi = _log_abs_xi(xi)
    ltf = math.log(tf)
    if lxi == -math.inf:
        J = 0
    else:
        lhalf = math.log(0.5)
        J = max(0, math.ceil((lhalf - lxi) / ltf))
        while lxi + J * ltf > lhalf:
            J += 1
        while J > 0 and lxi + (J - 1) * ltf <= lhalf:
            J -= 1
        # extend until the tail bound itself is below tol, so the returned
        # enclosure can actually reach the requested width
        target = math.log(max(tol, 1e-250) / 4 * (1.0 - tf * tf)) / 2.0
        extra = 0
        while lxi + J * ltf > target and extra < 4000:
            J += 1
            extra += 1
    tail_log = lxi + J * ltf if lxi > -math.inf else -math.inf
    T = math.exp(2.0 * tail_log) / (1.0 - tf * tf) if tail_log > -math.inf else 0.0

    prec = 96
    while True:
        lo, hi = 1.0, 1.0
        zero = False
        for j in range(J):
            f = _factor(t, j, xi, prec)
            if f.lo == f.hi == 0:
                zero = True
                break
            cand = [lo * f.lo, lo * f.hi, hi * f.lo, hi * f.hi]
            lo, hi = min(cand), max(cand)
        if zero:
            return ProductValue(BoundedValue.exact(0), J, T, zero_flag=True)
        # tail factor in [exp(-T), 1]; current product sign may be negative
        tlo = math.exp(-T)
        cand = [lo * tlo, lo, hi * tlo, hi]
        vlo, vhi = max(-1.0, min(cand)), min(1.0, max(cand))
        if vhi - vlo <= tol or prec >= _PREC_CAP:
            return ProductValue(BoundedValue(vlo, vhi), J, T, zero_flag=False)
        prec *= 2


def conv_hat(a: Fraction, b: Fraction, lam: Fraction, xi: Frequency,
             tol: float = 1e-12) -> tuple[ProductValue, ProductValue, ProductValue]:
    """Phi(xi) = F(mu_a)(xi) * F(mu_b)(lambda xi), returned as (Phi1, Phi2, Phi)."""
    a, b, lam = Fraction(a), Fraction(b), Fraction(lam)
    phi1 = mu_hat(RecentredMeasure(a), xi, tol)
    if lam == 0:
        phi2 = ProductValue(BoundedValue.exact(1), 0, 0.0)
    else:
        if isinstance(xi, PiMultiple):
            xi2: Frequency = xi.scaled(lam)
        elif isinstance(xi, BoundedValue):
            xi2 = xi.scale(lam)
        else:
            xi2 = Fraction(xi) * lam if isinstance(xi, Fraction) else float(xi) * float(lam)
        phi2 = mu_hat(RecentredMeasure(b), xi2, tol)
    if phi1.zero_flag or phi2.zero_flag:
        val = BoundedValue.exact(0)
    else:
        cand = [float(phi1.lo) * float(phi2.lo), float(phi1.lo) * float(phi2.hi),
                float(phi1.hi) * float(phi2.lo), float(phi1.hi) * float(phi2.hi)]
        val = BoundedValue(max(-1.0, min(cand)), min(1.0, max(cand)))
    phi = ProductValue(val, phi1.J + phi2.J, phi1.tail_bound + phi2.tail_bound,
                       zero_flag=phi1.zero_flag or phi2.zero_flag)
    return phi1, phi2, phi


def lambda_recentred(a: Fraction, b: Fraction, lam: Fraction) -> Fraction:
    """Convert the unit-interval scaling parameter to the recentred convention.

    The unit-interval measures are affine images of the recentred ones with
    slopes (1-a)/2 and (1-b)/2, so the scale factor picks up (1-b)/(1-a).
    """
    a, b, lam = Fraction(a), Fraction(b), Fraction(lam)
    return lam * (1 - b) / (1 - a)


def lambda_unit_interval(a: Fraction, b: Fraction, lam_rec: Fraction) -> Fraction:
    """Inverse of :func:`lambda_recentred`."""
    a, b, lam_rec = Fraction(a), Fraction(b), Fraction(lam_rec)
    return lam_rec * (1 - a) / (1 - b)


def c1_constant(a: Fraction, cert: PisotCertificate, tol: float = 1e-10) -> BoundedValue:
    """Certified enclosure of c1 = prod_{j in Z} |cos(pi a^{-j})| for Pisot 1/a.

    Splits into the small-argument side prod_{k>=1} cos(pi a^k) (plain
    truncation with an exp(-T) tail) and the Pisot side
    prod_{j>=1} |cos(pi theta^j)| where dist(theta^j, Z) <= r gamma^j makes
    the factors approach 1 geometrically.  The j = 0 factor is |cos pi| = 1.
    """
    a = Fraction(a)
    if cert is None:
        raise ValueError("a Pisot certificate for 1/a is required")
    if float(cert.theta.lo) <= 2:
        raise ValueError("c1 requires theta = 1/a > 2 for positivity of the small side")
    af = float(a)
    # small-argument side: prod_{k>=1} cos(pi a^k), each factor in (0,1)
    k0 = 1
    while math.pi * af ** (k0 + 1) > 0.5:
        k0 += 1
    lo, hi = 1.0, 1.0
    for k in range(1, k0 + 1):
        f = _cos_pi_rational(Fraction(a**k), 96)
        if f.lo <= 0:
            raise PrecisionExceeded("small-side factor not certified positive")
        lo *= float(f.lo)
        hi *= float(f.hi)
    T = (math.pi * af ** (k0 + 1)) ** 2 / (1.0 - af * af)
    lo *= math.exp(-T)
    # Pisot side: prod_{j>=1} |cos(pi theta^j)|
    if cert.r == 0:
        # theta integer: every factor is exactly 1
        plo, phi_ = 1.0, 1.0
    else:
        gam = float(cert.gamma.hi)
        j0 = 1
        while math.pi * cert.r * gam ** (j0 + 1) > 0.5:
            j0 += 1
        plo, phi_ = 1.0, 1.0
        for j in range(1, j0 + 1):
            d = power_distance(cert, j)
            if float(d.hi) >= 0.5:
                raise PrecisionExceeded(f"dist(theta^{j}, Z) not certified below 1/2")
            plo *= math.cos(math.pi * float(d.hi)) - 1e-14
            phi_ *= math.cos(math.pi * float(d.lo)) + 1e-14
        Tp = (math.pi * cert.r * gam ** (j0 + 1)) ** 2 / (1.0 - gam * gam)
        plo *= math.exp(-Tp)
    out = BoundedValue(max(0.0, lo * plo - 1e-13), min(1.0, hi * phi_ + 1e-13))
    if out.lo <= 0:
        raise PrecisionExceeded("c1 lower bound not certified positive")
    return out


@dataclass(frozen=True)
class ScanRow:
    N: int
    M: int
    sigma: Fraction
    phi1: ProductValue
    phi2: ProductValue
    phi: ProductValue
    flagged: bool = False  # enclosure wider than requested


def phi_at(a: Fraction, b: Fraction, lam: Fraction, N: int,
           tol: float = 1e-10) -> tuple[ProductValue, ProductValue, ProductValue]:
    """Phi1, Phi2, Phi at the frequency xi = pi * a^{-N}, all certified."""
    a = Fraction(a)
    return conv_hat(a, b, lam, PiMultiple(a**-N), tol)


def pisot_scan(a: Fraction, b: Fraction, lam: Fraction,
               witnesses, tol: float = 1e-8) -> list[ScanRow]:
    """Evaluate |Phi(pi a^{-N})| along a witness sequence (N, M).

    ``witnesses`` is an iterable of (N, M) pairs or Witness objects.  Each row
    carries sigma = lambda a^{-N} - b^{-M} exactly, the two factors, and the
    certified |Phi| enclosure; rows whose enclosure stays wider than ``tol``
    are flagged rather than dropped.
    """
    a, b, lam = Fraction(a), Fraction(b), Fraction(lam)
    rows = []
    for w in witnesses:
        if hasattr(w, "n"):
            N, M = w.n, w.m
        else:
            N, M = w
        sigma = lam * a**-N - b**-M
        phi1, phi2, phi = phi_at(a, b, lam, N, tol)
        flagged = (not phi.zero_flag) and (float(phi.hi) - float(phi.lo) > tol)
        rows.append(ScanRow(N=N, M=M, sigma=sigma, phi1=phi1, phi2=phi2,
                            phi=phi, flagged=flagged))
    return rows


def scan_rows_csv(rows: list[ScanRow]) -> str:
    """Serialize scan rows with the fixed column layout."""
    out = ["N,M,sigma,phi1_lo,phi1_hi,phi2_lo,phi2_hi,phi_abs_lo,phi_abs_hi"]
    for r in rows:
        lo, hi = float(r.phi.lo), float(r.phi.hi)
        abs_lo = 0.0 if lo <= 0 <= hi else min(abs(lo), abs(hi))
        abs_hi = max(abs(lo), abs(hi))
        out.append(f"{r.N},{r.M},{float(r.sigma):.17g},"
                   f"{float(r.phi1.lo):.17g},{float(r.phi1.hi):.17g},"
                   f"{float(r.phi2.lo):.17g},{float(r.phi2.hi):.17g},"
                   f"{abs_lo:.17g},{abs_hi:.17g}")
    return "\n".join(out) + "\n"


def abs_enclosure(pv: ProductValue) -> BoundedValue:
    """|value| enclosure of a product value."""
    lo, hi = float(pv.lo), float(pv.hi)
    if lo <= 0 <= hi:
        return BoundedValue(0.0, max(abs(lo), abs(hi)))
    return BoundedValue(min(abs(lo), abs(hi)), max(abs(lo), abs(hi)))


def salem_decay_probe(a: Fraction, xi_max: float, grid: int = 64) -> list[tuple[float, float, float]]:
    """Sampled range maxima of |F(mu_a)| over dyadic frequency ranges.

    Returns (range_lo, range_hi, max_sampled_abs) triples for qualitative
    decay inspection; no certification is claimed for the sup itself.
    """
    m = RecentredMeasure(Fraction(a))
    out = []
    lo = 1.0
    while lo < xi_max:
        hi = min(2.0 * lo, xi_max)
        best = 0.0
        for i in range(grid):
            xi = lo + (hi - lo) * (i + 0.5) / grid
            pv = mu_hat(m, xi, tol=1e-9)
            best = max(best, float(abs_enclosure(pv).hi))
        out.append((lo, hi, best))
        lo = hi
    return out
