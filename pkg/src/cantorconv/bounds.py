"""Certified two-sided bounds on scalar quantities.

A ``BoundedValue`` is a pair (lo, hi) with lo <= hi, carried either as exact
``Fraction`` endpoints or as floats that already include any rounding slack.
The arithmetic here is deliberately minimal: only the operations the rest of
the package needs, all monotone-safe for nonnegative operands where noted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Scalar = Union[int, float, Fraction]


class PrecisionExceeded(RuntimeError):
    """Raised when a branch decision stays undecidable at the precision cap."""


class ToleranceNotMet(RuntimeError):
    """Raised when an enclosure cannot be tightened to the requested width."""

    def __init__(self, message: str, partial: "BoundedValue | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class BoundedValue:
    """Certified enclosure [lo, hi] of a real quantity."""

    lo: Scalar
    hi: Scalar

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"invalid enclosure: lo={self.lo} > hi={self.hi}")

    @classmethod
    def exact(cls, x: Scalar) -> "BoundedValue":
        return cls(x, x)

    @property
    def mid(self) -> float:
        return (float(self.lo) + float(self.hi)) / 2.0

    @property
    def width(self) -> Scalar:
        return self.hi - self.lo

    def contains(self, x: Scalar) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other: "BoundedValue") -> "BoundedValue":
        return BoundedValue(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "BoundedValue") -> "BoundedValue":
        return BoundedValue(self.lo - other.hi, self.hi - other.lo)

    def mul_nonneg(self, other: "BoundedValue") -> "BoundedValue":
        """Product enclosure; both operands must be nonnegative."""
        if self.lo < 0 or other.lo < 0:
            raise ValueError("mul_nonneg requires nonnegative enclosures")
        return BoundedValue(self.lo * other.lo, self.hi * other.hi)

    def div_pos(self, other: "BoundedValue") -> "BoundedValue":
        """Quotient enclosure; numerator nonnegative, denominator positive."""
        if self.lo < 0 or other.lo <= 0:
            raise ValueError("div_pos requires nonneg numerator, positive denominator")
        return BoundedValue(self.lo / other.hi, self.hi / other.lo)

    def log(self) -> "BoundedValue":
        """Natural log enclosure; requires lo > 0. Endpoints become floats."""
        if self.lo <= 0:
            raise ValueError("log requires a strictly positive enclosure")
        return BoundedValue(math.log(float(self.lo)) - 1e-14,
                            math.log(float(self.hi)) + 1e-14)

    def scale(self, c: Scalar) -> "BoundedValue":
        if c >= 0:
            return BoundedValue(self.lo * c, self.hi * c)
        return BoundedValue(self.hi * c, self.lo * c)

    def inflate(self, rel: float, absolute: float = 0.0) -> "BoundedValue":
        """Widen by a relative factor plus an absolute slack (floats)."""
        lo = float(self.lo)
        hi = float(self.hi)
        return BoundedValue(lo - abs(lo) * rel - absolute,
                            hi + abs(hi) * rel + absolute)


class MassBound(BoundedValue):
    """Enclosure of a probability mass: 0 <= lo <= hi <= 1 (small slack on hi)."""

    def __post_init__(self):
        super().__post_init__()
        if self.lo < 0 or self.hi > Fraction(1) + Fraction(1, 10**6):
            raise ValueError(f"mass bound out of [0,1]: [{self.lo}, {self.hi}]")
