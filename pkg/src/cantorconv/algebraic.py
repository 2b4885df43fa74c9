"""Pisot number certification and the integer-distance machinery.

A Pisot number is an algebraic integer theta > 1 all of whose conjugates lie
strictly inside the unit circle.  Powers of such theta approach integers
geometrically: dist(theta^n, Z) <= r * gamma^n with gamma the largest
conjugate modulus and r the number of conjugates.  That bound, and the
derived constant eps = (1/2) dist({theta^n}, Z + 1/2), are what the Fourier
non-decay scan consumes.

Root isolation is delegated to sympy's certified real/complex root objects;
enclosures are extracted at increasing precision until every acceptance
decision (theta > 1, |conjugate| < 1) is unambiguous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import sympy
from mpmath import mp

from .bounds import BoundedValue, PrecisionExceeded

_X = sympy.Symbol("x")


@dataclass(frozen=True)
class IntPolynomial:
    """Monic integer polynomial, coefficients constant term first."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        cs = tuple(int(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", cs)
        if len(cs) < 2:
            raise ValueError("degree must be >= 1")
        if cs[-1] != 1:
            raise ValueError("polynomial must be monic (leading coefficient 1)")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def to_sympy(self) -> sympy.Poly:
        expr = sum(c * _X**i for i, c in enumerate(self.coeffs))
        return sympy.Poly(expr, _X)

    def __str__(self) -> str:
        return str(self.to_sympy().as_expr())


class NotPisot(ValueError):
    """Rejection with the violating root enclosure attached."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class PisotCertificate:
    """Certified Pisot data: the dominant root and its conjugate bound."""

    poly: IntPolynomial
    theta: BoundedValue           # real enclosure, lo > 1
    conjugates: tuple[tuple[BoundedValue, BoundedValue], ...]  # (re, im) enclosures
    gamma: BoundedValue           # max conjugate modulus, hi < 1 (0 if r == 0)

    @property
    def r(self) -> int:
        return len(self.conjugates)

    def power_sum_sequence(self, n: int) -> list[int]:
        """s_0..s_n with s_k = sum of k-th powers of all roots (exact integers).

        Newton's identities give the linear recurrence
        s_k = -sum_{i=1..d} c_{d-i} s_{k-i}  for k >= d, with the usual
        startup identities below degree.
        """
        cs = self.poly.coeffs
        d = self.poly.degree
        s = [d]
        for k in range(1, n + 1):
            acc = 0
            for i in range(1, min(k, d) + 1):
                # Newton's identities: the i == k term (possible only for
                # k <= d) carries the multiplier k instead of s_0.
                mult = k if i == k else s[k - i]
                acc -= cs[d - i] * mult
            s.append(acc)
        return s


def _root_box(root, prec_digits: int):
    """(re, im) float enclosures of a sympy root at ~prec_digits digits."""
    val = sympy.N(root, prec_digits)
    re = float(sympy.re(val))
    im = float(sympy.im(val))
    slack = 10.0 ** (-(prec_digits - 3))
    return (BoundedValue(re - slack, re + slack),
            BoundedValue(im - slack, im + slack))


def certify_pisot(poly: IntPolynomial, precision: int = 30,
                  max_precision: int = 300,
                  assume_irreducible: bool = False) -> PisotCertificate:
    """Certify that the largest real root of ``poly`` is a Pisot number.

    Accepts iff exactly one root enclosure is real with theta > 1 and every
    other root has modulus < 1.  Raises :class:`NotPisot` with the violating
    enclosure otherwise, and :class:`PrecisionExceeded` if a comparison stays
    undecidable at ``max_precision`` digits.
    """
    sp = poly.to_sympy()
    if sympy.gcd_list([sympy.Integer(c) for c in poly.coeffs]) != 1:
        raise NotPisot("polynomial content is not 1")
    if not assume_irreducible:
        factors = sp.factor_list()[1]
        if len(factors) != 1 or factors[0][1] != 1:
            raise NotPisot(f"polynomial is reducible or has repeated roots: {factors}")
    roots = sp.all_roots()

    prec = precision
    while prec <= max_precision:
        boxes = [_root_box(r, prec) for r in roots]
        dominant = None
        conj = []
        undecided = False
        for r, (re, im) in zip(roots, boxes):
            is_real = r.is_real
            if is_real and re.lo > 1:
                if dominant is not None:
                    raise NotPisot("two real roots exceed 1", witness=(re, im))
                dominant = re
                continue
            # conjugate: need |z| < 1 certified
            mod_hi = (max(abs(re.lo), abs(re.hi)) ** 2
                      + max(abs(im.lo), abs(im.hi)) ** 2) ** 0.5
            mod_lo = 0.0
            if re.lo > 0 or re.hi < 0 or im.lo > 0 or im.hi < 0:
                rlo = min(abs(re.lo), abs(re.hi)) if (re.lo > 0 or re.hi < 0) else 0.0
                ilo = min(abs(im.lo), abs(im.hi)) if (im.lo > 0 or im.hi < 0) else 0.0
                mod_lo = (rlo**2 + ilo**2) ** 0.5
            if mod_hi < 1:
                conj.append((re, im, BoundedValue(mod_lo, mod_hi)))
            elif mod_lo >= 1:
                raise NotPisot(f"conjugate with modulus >= 1: re={re}, im={im}",
                               witness=(re, im))
            elif is_real and re.hi > 1 and re.lo <= 1:
                undecided = True
                break
            else:
                undecided = True
                break
        if not undecided:
            if dominant is None:
                raise NotPisot("no real root > 1")
            if conj:
                gamma = BoundedValue(max(c[2].lo for c in conj),
                                     max(c[2].hi for c in conj))
            else:
                gamma = BoundedValue.exact(0)
            return PisotCertificate(poly=poly, theta=dominant,
                                    conjugates=tuple((c[0], c[1]) for c in conj),
                                    gamma=gamma)
        prec *= 2
    raise PrecisionExceeded(f"root classification undecided at {max_precision} digits")


def pisot_certificate_for_reciprocal(b: Fraction) -> PisotCertificate | None:
    """Certificate for theta = 1/b when 1/b is an integer >= 2, else None."""
    inv = 1 / Fraction(b)
    if inv.denominator == 1 and inv.numerator >= 2:
        k = inv.numerator
        return certify_pisot(IntPolynomial((-k, 1)))
    return None


def _theta_enclosure(cert: PisotCertificate, prec: int) -> tuple:
    """(lo, hi) mpf enclosure of theta at working precision ``prec`` bits.

    Refines from the certificate's float enclosure with Newton iteration,
    then certifies the result by a sign change of the polynomial across the
    returned bracket, so the enclosure is independent of the refinement.
    """
    cs = cert.poly.coeffs
    poly = list(reversed(cs))  # mp.polyval wants leading coefficient first

    def p(x):
        return mp.polyval([mp.mpf(c) for c in poly], x)

    x = mp.mpf(cert.theta.mid)
    for _ in range(int(math.log2(prec)) + 4):
        dp = mp.polyval([mp.mpf(c * i) for i, c in
                         zip(range(len(poly) - 1, 0, -1), poly[:-1])], x)
        x = x - p(x) / dp
    delta = abs(x) * mp.mpf(2) ** (8 - prec) + mp.mpf(2) ** (8 - prec)
    lo, hi = x - delta, x + delta
    if not (p(lo) * p(hi) < 0 and float(lo) >= float(cert.theta.lo) - 1e-6
            and float(hi) <= float(cert.theta.hi) + 1e-6):
        raise PrecisionExceeded("theta refinement failed to certify a bracket")
    return lo, hi


def power_distance(cert: PisotCertificate, n: int, prec: int = 100) -> BoundedValue:
    """Certified enclosure of dist(theta^n, Z).

    Uses the exact integer power sums s_n: the conjugate sum s_n - theta^n
    has modulus <= r*gamma^n, and theta^n itself is enclosed by a
    high-precision interval power of the certified root.  The working
    precision grows with n so that the n-th power stays sharp enough to
    resolve distances of size gamma^n.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if cert.r == 0:
        return BoundedValue.exact(Fraction(0))
    s_n = cert.power_sum_sequence(n)[n]
    prec = max(prec, 64 + n * (int(math.log2(max(2.0, float(cert.theta.hi))))
                               + 2))
    with mp.workprec(prec):
        lo, hi = _theta_enclosure(cert, prec - 16)
        tn_lo, tn_hi = lo**n, hi**n
        # distance to the nearest integer; s_n is that integer once r*gamma^n < 1/2
        d_lo = abs(mp.mpf(s_n) - tn_hi)
        d_hi = abs(mp.mpf(s_n) - tn_lo)
        if d_lo > d_hi:
            d_lo, d_hi = d_hi, d_lo
        if tn_lo <= s_n <= tn_hi:
            d_lo = mp.mpf(0)
        d_hi = min(d_hi, mp.mpf(0.5))
        # guard: the true nearest integer may differ from s_n only if the
        # conjugate-sum bound allows it past 1/2
        conj_bound = cert.r * float(cert.gamma.hi) ** n
        if conj_bound >= 0.5:
            # fall back to distance of the enclosure to the integer lattice
            fl = mp.floor(tn_lo)
            cand = [abs(tn_lo - fl), abs(tn_lo - fl - 1),
                    abs(tn_hi - mp.floor(tn_hi)), abs(tn_hi - mp.floor(tn_hi) - 1)]
            if mp.floor(tn_lo) != mp.floor(tn_hi) or tn_hi - tn_lo > 0.25:
                return BoundedValue(0.0, 0.5)
            d_lo = max(mp.mpf(0), min(cand) - (tn_hi - tn_lo))
            d_hi = min(mp.mpf(0.5), min(cand) + (tn_hi - tn_lo))
        # outward slack covers the final float64 rounding (a few ulps)
        rel = 2.0 ** -45
        return BoundedValue(max(0.0, float(d_lo) * (1 - rel) - 1e-300),
                            min(0.5, float(d_hi) * (1 + rel) + 1e-300))


def _dist_to_half_lattice(cert: PisotCertificate, n: int, prec: int = 100) -> BoundedValue:
    """Enclosure of dist(theta^n, Z + 1/2)."""
    d = power_distance(cert, n, prec)
    # dist(x, Z+1/2) = 1/2 - dist(x, Z)
    return BoundedValue(max(0.0, 0.5 - float(d.hi)), 0.5 - float(d.lo))


def epsilon_constant(cert: PisotCertificate, prec: int = 100) -> BoundedValue:
    """Certified enclosure of eps = (1/2) dist({theta^n : n in N}, Z + 1/2).

    Exact value 1/4 when theta is a rational integer (r = 0).  Otherwise a
    finite scan over n <= n0, where r*gamma^{n0} < 1/4 makes the tail bound
    1/2 - r*gamma^{n0} dominate, closes the infimum.
    """
    if cert.r == 0:
        return BoundedValue.exact(Fraction(1, 4))
    gamma_hi = float(cert.gamma.hi)
    if gamma_hi >= 1:
        raise ValueError("degenerate certificate: gamma >= 1")
    n0 = 1
    while cert.r * gamma_hi**n0 >= 0.25:
        n0 += 1
        if n0 > 10_000:
            raise PrecisionExceeded("tail index for epsilon did not stabilize")
    best_lo, best_hi = 0.5, 0.5
    for n in range(0, n0 + 1):
        d = _dist_to_half_lattice(cert, n, prec)
        best_lo = min(best_lo, float(d.lo))
        best_hi = min(best_hi, float(d.hi))
    # tail n > n0 has dist(theta^n, Z) < 1/4, hence dist to Z+1/2 > 1/4
    tail_lo = 0.5 - cert.r * gamma_hi ** (n0 + 1)
    return BoundedValue(0.5 * min(best_lo, tail_lo) if tail_lo < best_lo else 0.5 * best_lo,
                        0.5 * best_hi)
