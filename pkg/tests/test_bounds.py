import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cantorconv.bounds import BoundedValue, MassBound


def test_invalid_enclosure_rejected():
    with pytest.raises(ValueError):
        BoundedValue(1.0, 0.5)


def test_exact_and_mid():
    b = BoundedValue.exact(Fraction(1, 3))
    assert b.lo == b.hi == Fraction(1, 3)
    assert math.isclose(b.mid, 1 / 3)
    assert b.width == 0


def test_arithmetic_enclosure():
    x = BoundedValue(1.0, 2.0)
    y = BoundedValue(3.0, 5.0)
    assert (x + y).lo == 4.0 and (x + y).hi == 7.0
    assert (y - x).lo == 1.0 and (y - x).hi == 4.0
    p = x.mul_nonneg(y)
    assert p.lo == 3.0 and p.hi == 10.0
    q = y.div_pos(x)
    assert q.lo == 1.5 and q.hi == 5.0


def test_log_and_scale():
    x = BoundedValue(1.0, math.e)
    lg = x.log()
    assert lg.lo <= 0.0 <= lg.hi and lg.hi >= 1.0 - 1e-9
    s = x.scale(-2.0)
    assert s.lo == -2 * math.e and s.hi == -2.0


def test_mass_bound_range():
    MassBound(Fraction(0), Fraction(1))
    with pytest.raises(ValueError):
        MassBound(Fraction(-1, 10), Fraction(1, 2))
    with pytest.raises(ValueError):
        MassBound(Fraction(1, 2), Fraction(3, 2))


finite = st.floats(min_value=-1e6, max_value=1e6,
                   allow_nan=False, allow_infinity=False)


@given(a=finite, b=finite, c=finite, d=finite, x=finite, y=finite)
def test_add_contains_pointwise_sum(a, b, c, d, x, y):
    u = BoundedValue(min(a, b), max(a, b))
    v = BoundedValue(min(c, d), max(c, d))
    px = min(max(x, u.lo), u.hi)
    py = min(max(y, v.lo), v.hi)
    assert (u + v).contains(px + py)


@given(a=finite, b=finite, rel=st.floats(min_value=0, max_value=1))
def test_inflate_widens(a, b, rel):
    u = BoundedValue(min(a, b), max(a, b))
    w = u.inflate(rel, 1e-9)
    assert w.lo <= u.lo and w.hi >= u.hi
