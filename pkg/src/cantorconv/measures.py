"""Central Cantor sets C_a and their natural measures mu_a.

Everything geometric is exact: the contraction ratio is a ``Fraction``,
cylinder intervals have rational endpoints, and interval masses come with
certified rational enclosures.  Only the similarity dimension and the random
sampler produce floating-point output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from mpmath import mp

from .bounds import BoundedValue, MassBound

RationalLike = Fraction | int | str


def _as_fraction(x: RationalLike) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class CantorParam:
    """Contraction ratio of a central Cantor construction.

    ``a`` must lie in (0,1) exactly.  The classical dissection picture
    (remove a central gap of length 1-2a) needs a < 1/2; ratios in [1/2,1)
    are admitted only for Bernoulli-convolution Fourier work.
    """

    a: Fraction

    def __post_init__(self):
        a = _as_fraction(self.a)
        object.__setattr__(self, "a", a)
        if not Fraction(0) < a < Fraction(1):
            raise ValueError(f"contraction ratio must be in (0,1), got {a}")

    @property
    def strict(self) -> bool:
        """True when a < 1/2, i.e. the attractor is a genuine Cantor set."""
        return self.a < Fraction(1, 2)

    def require_strict(self):
        if not self.strict:
            raise ValueError(f"operation requires a < 1/2, got a={self.a}")

    def dimension(self, prec: int = 80) -> BoundedValue:
        """Similarity dimension log 2 / log(1/a) with a certified error bound."""
        if self.a == Fraction(1, 2):
            return BoundedValue.exact(Fraction(1))
        with mp.workprec(prec + 10):
            d = mp.log(2) / mp.log(Fraction(1, 1) / self.a)
            err = mp.mpf(2) ** (-prec)
            return BoundedValue(float(d - err), float(d + err))

    @property
    def d(self) -> float:
        return self.dimension().mid


def similarity_dimension(p: CantorParam, prec: int = 80) -> BoundedValue:
    return p.dimension(prec)


def apply_map(a: Fraction, symbol: int, x: Fraction) -> Fraction:
    """The IFS map x -> a x + symbol*(1-a)."""
    return a * x + symbol * (1 - a)


def cylinder_interval(p: CantorParam, word: Sequence[int] | str) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of the cylinder f_{a,word}([0,1]).

    The maps compose left to right: word "01" means f_0 after f_1 is applied
    innermost, i.e. f_0(f_1([0,1])).
    """
    p.require_strict()
    a = p.a
    syms = [int(c) for c in word]
    left = Fraction(0)
    # left endpoint of f_{u_1} o ... o f_{u_k} ([0,1]) is sum u_j (1-a) a^(j-1)
    pw = Fraction(1)
    for s in syms:
        if s not in (0, 1):
            raise ValueError(f"word symbols must be 0/1, got {s}")
        left += s * (1 - a) * pw
        pw *= a
    return left, left + pw


def cylinder_lefts(a: Fraction, depth: int) -> np.ndarray:
    """Float64 left endpoints of all depth-``depth`` cylinders, sorted.

    Built by the doubling recursion lefts_{j+1} = lefts_j  U  lefts_j + (1-a)a^j.
    """
    af = float(a)
    lefts = np.zeros(1)
    step = 1.0 - af
    for _ in range(depth):
        lefts = np.concatenate([lefts, lefts + step])
        step *= af
    lefts.sort()
    return lefts


def mu_mass(p: CantorParam, interval: tuple[RationalLike, RationalLike],
            tol: RationalLike = Fraction(1, 10**6)) -> MassBound:
    """Certified enclosure of mu_a([c,d)) with hi - lo <= tol.

    Recursive descent over cylinders: a cylinder entirely inside [c,d)
    contributes its full mass, a disjoint one contributes nothing, and
    straddling cylinders are refined until the residual straddling mass is
    below ``tol``.  Endpoints carry no mass, so closed-cylinder/half-open
    interval bookkeeping is harmless.
    """
    p.require_strict()
    tol = _as_fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    c, d = (_as_fraction(interval[0]), _as_fraction(interval[1]))
    if d <= c:
        return MassBound(Fraction(0), Fraction(0))
    a = p.a
    lo = Fraction(0)
    # straddlers: list of (left, width, mass)
    straddle = [(Fraction(0), Fraction(1), Fraction(1))]
    while straddle:
        smass = sum(m for _, _, m in straddle)
        if smass <= tol:
            break
        nxt = []
        for left, width, mass in straddle:
            for child_left in (left, left + (1 - a) * width):
                cw = a * width
                cm = mass / 2
                if child_left >= c and child_left + cw <= d:
                    lo += cm
                elif child_left + cw <= c or child_left >= d:
                    continue
                else:
                    nxt.append((child_left, cw, cm))
        straddle = nxt
    resid = sum((m for _, _, m in straddle), Fraction(0))
    return MassBound(lo, lo + resid)


def sample(p: CantorParam, depth: int, rng: np.random.Generator) -> float:
    """One draw from mu_a truncated at ``depth`` digits (error <= a^depth)."""
    return float(sample_many(p, depth, rng, 1)[0])


def sample_many(p: CantorParam, depth: int, rng: np.random.Generator,
                count: int) -> np.ndarray:
    """Vectorized truncated sampling: (1-a) * sum_{j<depth} omega_j a^j."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    af = float(p.a)
    weights = (1.0 - af) * af ** np.arange(depth)
    bits = rng.integers(0, 2, size=(count, depth))
    return bits @ weights


def sample_from_bits(p: CantorParam, bits: Iterable[int]) -> float:
    """Deterministic truncated sum for explicit digit sequences (tests)."""
    af = float(p.a)
    return float(sum((1.0 - af) * b * af**j for j, b in enumerate(bits)))


def default_sample_depth(p: CantorParam, tol: float) -> int:
    """Smallest depth with a^depth <= tol."""
    return max(1, math.ceil(math.log(tol) / math.log(float(p.a))))
