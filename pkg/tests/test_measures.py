import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cantorconv.measures import (CantorParam, cylinder_interval, cylinder_lefts,
                                 default_sample_depth, mu_mass, sample_from_bits,
                                 sample_many, similarity_dimension)


def test_param_validation():
    with pytest.raises(ValueError):
        CantorParam(Fraction(0))
    with pytest.raises(ValueError):
        CantorParam(Fraction(3, 2))
    p = CantorParam(Fraction(1, 2))
    assert not p.strict
    with pytest.raises(ValueError):
        p.require_strict()


def test_similarity_dimension_values():
    assert similarity_dimension(CantorParam(Fraction(1, 4))).contains(0.5)
    d3 = similarity_dimension(CantorParam(Fraction(1, 3)))
    assert d3.contains(math.log(2) / math.log(3))
    assert float(d3.width) < 1e-20
    assert similarity_dimension(CantorParam(Fraction(1, 2))).lo == 1


def test_cylinder_interval_exact():
    p = CantorParam(Fraction(1, 3))
    assert cylinder_interval(p, "") == (Fraction(0), Fraction(1))
    assert cylinder_interval(p, "0") == (Fraction(0), Fraction(1, 3))
    assert cylinder_interval(p, "1") == (Fraction(2, 3), Fraction(1))
    # nesting: the cylinder of "10" is the left third of the right third
    assert cylinder_interval(p, "10") == (Fraction(2, 3), Fraction(7, 9))
    with pytest.raises(ValueError):
        cylinder_interval(p, "02")


def test_mu_mass_halves():
    p = CantorParam(Fraction(1, 4))
    m = mu_mass(p, (Fraction(0), Fraction(1, 4)))
    assert m.lo == m.hi == Fraction(1, 2)
    # the central gap carries no mass
    g = mu_mass(p, (Fraction(1, 4), Fraction(3, 4)))
    assert g.lo == 0 and g.hi <= Fraction(1, 10**6)


def test_mu_mass_self_similarity():
    # mu(a * I) = mu(I) / 2 for I inside [0,1]
    p = CantorParam(Fraction(1, 3))
    big = mu_mass(p, (Fraction(0), Fraction(1, 2)), tol=Fraction(1, 10**9))
    small = mu_mass(p, (Fraction(0), Fraction(1, 6)), tol=Fraction(1, 10**9))
    assert abs(float(small.lo) - float(big.lo) / 2) < 1e-8
    assert abs(float(small.hi) - float(big.hi) / 2) < 1e-8


def test_cylinder_lefts_doubling():
    lefts = cylinder_lefts(Fraction(1, 4), 3)
    assert len(lefts) == 8
    assert lefts[0] == 0.0
    assert math.isclose(lefts[-1], 0.75 + 0.75 / 4 + 0.75 / 16)
    assert all(lefts[i] < lefts[i + 1] for i in range(7))


def test_samplers(rng):
    p = CantorParam(Fraction(1, 3))
    xs = sample_many(p, 30, rng, 2000)
    assert xs.shape == (2000,)
    assert float(xs.min()) >= 0.0 and float(xs.max()) <= 1.0
    # the gap (1/3, 2/3) is missed by every sample
    assert not np.any((xs > 1 / 3 + 1e-9) & (xs < 2 / 3 - 1e-9))
    assert sample_from_bits(p, [1, 0, 0]) == pytest.approx(2 / 3)
    assert default_sample_depth(p, 1e-6) == 13


@settings(max_examples=30, deadline=None)
@given(c=st.fractions(min_value=0, max_value=1),
       w=st.fractions(min_value=0, max_value=1))
def test_mu_mass_enclosure_and_monotone(c, w):
    p = CantorParam(Fraction(1, 4))
    d = min(Fraction(1), c + w)
    m = mu_mass(p, (c, d), tol=Fraction(1, 1000))
    assert 0 <= m.lo <= m.hi <= 1
    # enlarging the interval cannot lose certified mass
    m2 = mu_mass(p, (Fraction(0), Fraction(1)), tol=Fraction(1, 1000))
    assert m2.lo >= m.lo - Fraction(1, 1000)
