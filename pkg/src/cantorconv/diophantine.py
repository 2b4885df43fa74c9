"""Continued fractions and the construction of exceptional scaling parameters.

For a pair of ratios (a, b) the multiplicative relation a^p = b^q is decided
exactly through prime factorizations, and when log b / log a is irrational
the nested-interval search below produces lambda values admitting many
witness pairs (n, m) with |lambda a^{-n} - b^{-m}| < eps.  Those witnesses
drive the Fourier non-decay scan.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import sympy
from mpmath import mp

from .bounds import BoundedValue, PrecisionExceeded


@dataclass(frozen=True)
class ContinuedFraction:
    """Certified partial quotients and convergents of a real target."""

    quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]  # (p_k, q_k)
    truncated: bool = False  # True when a quotient was undecidable

    def __post_init__(self):
        if not self.quotients:
            object.__setattr__(self, "convergents", ())
            return
        # recompute from the recurrence to enforce the invariant
        pm1, qm1 = 1, 0
        p, q = self.quotients[0], 1
        conv = [(p, q)]
        for a_k in self.quotients[1:]:
            p, pm1 = a_k * p + pm1, p
            q, qm1 = a_k * q + qm1, q
            conv.append((p, q))
        if tuple(conv) != self.convergents:
            object.__setattr__(self, "convergents", tuple(conv))


def contfrac(value_fn: Callable[[int], tuple], k: int,
             start_prec: int = 64, max_prec: int = 4096) -> ContinuedFraction:
    """First ``k`` certified partial quotients of a real number.

    ``value_fn(prec)`` must return a (lo, hi) enclosure of the target at
    ``prec`` bits.  Precision doubles until each integer part is unambiguous;
    if the cap is reached the output is truncated and flagged.
    """
    prec = start_prec
    while True:
        lo, hi = value_fn(prec)
        lo = Fraction(lo)
        hi = Fraction(hi)
        quotients = []
        ok = True
        for _ in range(k):
            flo = math.floor(lo)
            fhi = math.floor(hi)
            if flo != fhi:
                ok = False
                break
            quotients.append(flo)
            lo, hi = lo - flo, hi - flo
            if lo <= 0:
                ok = False  # cannot certify the next reciprocal
                break
            lo, hi = 1 / hi, 1 / lo
        if ok:
            return ContinuedFraction(tuple(quotients), (), truncated=False)
        if prec >= max_prec:
            return ContinuedFraction(tuple(quotients), (), truncated=True)
        prec *= 2


def _mpf_fraction(v) -> Fraction:
    """Exact Fraction value of an mpmath float (sign * mantissa * 2^exp)."""
    sign, man, exp, _bc = v._mpf_
    if man == 0 and exp != 0:
        raise ValueError(f"non-finite value {v} has no rational form")
    num = int(-man if sign else man)  # gmpy2 backends yield mpz mantissas
    return Fraction(num) * Fraction(2) ** int(exp)


def mp_enclosure(fn: Callable[[], "mp.mpf"]) -> Callable[[int], tuple]:
    """Wrap an mpmath expression into a (lo,hi) enclosure function.

    The slack of 16 ulps is generous for the log/ratio expressions used here.
    """
    def value(prec: int):
        with mp.workprec(prec + 32):
            v = fn()
            eps = mp.mpf(2) ** (16 - prec)
            return (_mpf_fraction(mp.mpf(v - abs(v) * eps - eps)),
                    _mpf_fraction(mp.mpf(v + abs(v) * eps + eps)))
    return value


def log_ratio_cf(a: Fraction, b: Fraction, k: int) -> ContinuedFraction:
    """Continued fraction of log b / log a (both in (0,1), so the ratio > 0)."""
    fn = mp_enclosure(lambda: mp.log(Fraction(b)) / mp.log(Fraction(a)))
    return contfrac(fn, k)


def _prime_exponent_vector(x: Fraction) -> dict[int, int]:
    vec: dict[int, int] = {}
    for p, e in sympy.factorint(x.numerator).items():
        vec[p] = vec.get(p, 0) + e
    for p, e in sympy.factorint(x.denominator).items():
        vec[p] = vec.get(p, 0) - e
    return {p: e for p, e in vec.items() if e != 0}


def ratio_class(a: Fraction, b: Fraction) -> tuple[str, Fraction | None]:
    """Classify log b / log a for rational a, b in (0,1) exactly.

    The ratio is rational, equal to p/q in lowest terms, iff a^p = b^q, iff
    the prime exponent vectors of a and b are parallel.  Unique factorization
    makes this decision exact, not numerical.
    """
    a, b = Fraction(a), Fraction(b)
    if not (0 < a < 1 and 0 < b < 1):
        raise ValueError("ratios must be in (0,1)")
    va = _prime_exponent_vector(a)
    vb = _prime_exponent_vector(b)
    if set(va) != set(vb):
        return ("irrational", None)
    primes = sorted(va)
    p0 = primes[0]
    ratio = Fraction(vb[p0], va[p0])
    for p in primes[1:]:
        if Fraction(vb[p], va[p]) != ratio:
            return ("irrational", None)
    return ("rational", ratio)


@dataclass(frozen=True)
class Witness:
    n: int
    m: int
    residual_hi: Fraction  # certified upper bound on |lambda a^{-n} - b^{-m}|


@dataclass(frozen=True)
class WitnessList:
    lam_lo: Fraction
    lam_hi: Fraction
    lam_exact: Fraction | None
    epsilon: Fraction
    pairs: tuple[Witness, ...]
    complete: bool = True  # False when fewer than K witnesses were found

    def to_json(self) -> str:
        return json.dumps({
            "lambda_lo": str(self.lam_lo),
            "lambda_hi": str(self.lam_hi),
            "lambda_exact": str(self.lam_exact) if self.lam_exact is not None else None,
            "epsilon": str(self.epsilon),
            "complete": self.complete,
            "pairs": [{"n": w.n, "m": w.m, "residual_hi": str(w.residual_hi)}
                      for w in self.pairs],
        }, indent=2, sort_keys=True)


def verify_witness(a: Fraction, b: Fraction, lam: Fraction, eps: Fraction,
                   pair: tuple[int, int]) -> tuple[Fraction, bool]:
    """Exact residual |lambda a^{-n} - b^{-m}| and the eps comparison."""
    n, m = pair
    a, b, lam, eps = Fraction(a), Fraction(b), Fraction(lam), Fraction(eps)
    residual = abs(lam * a**-n - b**-m)
    return residual, residual < eps


def _log_fraction(x: Fraction) -> float:
    """log of a positive Fraction without overflowing on huge terms."""
    return math.log(x.numerator) - math.log(x.denominator)


def find_lambda(a: Fraction, b: Fraction, eps: Fraction,
                target_interval: tuple[Fraction, Fraction] | None = None,
                K: int = 3, n_max_per_stage: int = 30_000,
                n_min: int = 0,
                window_factor: Fraction = Fraction(9, 10)) -> WitnessList:
    """Nested-interval construction of lambda with K witness pairs.

    At each stage an anchor a^n b^{-m} inside the current interval is located
    (n strictly increasing across stages), after which the interval shrinks
    to the window {|lambda a^{-n} - b^{-m}| < window_factor * eps}.  The
    final lambda is the last anchor, an exact rational lying in every window,
    so all residuals are exact and below window_factor * eps < eps.

    The window at stage k has width ~ eps * a^{n_k} on the lambda axis, so
    the wait for the next anchor grows like a^{-n_k}: successive anchor
    indices grow geometrically, and only constructions whose early anchors
    occur at very small n complete several stages.  The defaults (a target
    interval around b^{-1}, a window factor close to 1, anchors allowed at
    n = 0) are chosen so that three stages finish quickly for pairs such as
    (1/4, 1/3); tighter windows or generic target intervals push the third
    anchor beyond computational reach.

    Candidate anchors are prefiltered in float log space (safe: the float
    error is orders of magnitude below the filter tolerance even for
    exponents in the tens of thousands) and only near-hits are verified with
    exact rational arithmetic, so late stages with astronomically fine
    windows stay cheap.
    """
    a, b, eps = Fraction(a), Fraction(b), Fraction(eps)
    wf = Fraction(window_factor)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0 < wf < 1:
        raise ValueError("window_factor must lie in (0, 1)")
    if K < 1:
        raise ValueError("K must be >= 1")
    cls, _ = ratio_class(a, b)
    if cls == "rational":
        raise ValueError("find_lambda requires log b / log a irrational")
    if target_interval is None:
        # a neighbourhood of b^-1, so the n = 0 anchor (0, 1) always exists
        target_interval = (Fraction(11, 12) / b, Fraction(13, 12) / b)
    c, d = Fraction(target_interval[0]), Fraction(target_interval[1])
    if not 0 < c < d:
        raise ValueError("target interval must satisfy 0 < c < d")
    log_a = math.log(float(a))
    log_b = math.log(float(b))
    anchors: list[tuple[int, int]] = []
    n = n_min - 1
    complete = True
    while len(anchors) < K:
        found = False
        lc, ld = _log_fraction(c), _log_fraction(d)
        lmid = 0.5 * (lc + ld)
        n_start = n + 1
        for n_try in range(n_start, n_start + n_max_per_stage):
            # want b^{-m} in (c*a^{-n}, d*a^{-n}): center the search there
            m_guess = round((lmid + n_try * (-log_a)) / (-log_b))
            for m_try in (m_guess - 1, m_guess, m_guess + 1):
                if m_try < 1:
                    continue
                la = n_try * log_a - m_try * log_b
                if la < lc - 1e-9 or la > ld + 1e-9:
                    continue
                anchor = a**n_try * b**-m_try
                if c < anchor < d:
                    anchors.append((n_try, m_try))
                    n = n_try
                    half = wf * eps * a**n_try
                    c = max(c, anchor - half)
                    d = min(d, anchor + half)
                    found = True
                    break
            if found:
                break
        if not found:
            complete = False
            break
    if not anchors:
        raise ValueError("no anchor found; widen the target interval or raise n_max_per_stage")
    n_last, m_last = anchors[-1]
    lam = a**n_last * b**-m_last
    pairs = []
    for (wn, wm) in anchors:
        residual, ok = verify_witness(a, b, lam, eps, (wn, wm))
        assert ok, "construction violated its own residual bound"
        pairs.append(Witness(wn, wm, residual))
    return WitnessList(lam_lo=c, lam_hi=d, lam_exact=lam, epsilon=eps,
                       pairs=tuple(pairs), complete=complete)
