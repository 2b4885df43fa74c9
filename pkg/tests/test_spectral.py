import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cantorconv.algebraic import pisot_certificate_for_reciprocal
from cantorconv.spectral import (PiMultiple, RecentredMeasure, abs_enclosure,
                                 c1_constant, conv_hat, lambda_recentred,
                                 lambda_unit_interval, mu_hat, phi_at,
                                 pisot_scan, scan_rows_csv)

HALF = RecentredMeasure(Fraction(1, 2))
QUARTER = RecentredMeasure(Fraction(1, 4))


def test_zero_frequency_is_one():
    for m in (HALF, QUARTER):
        pv = mu_hat(m, 0.0)
        assert pv.lo == pv.hi == 1
        pv = mu_hat(m, PiMultiple(Fraction(0)))
        assert pv.lo == pv.hi == 1


def test_half_ratio_closed_form():
    # t = 1/2 gives the uniform measure on [-2, 2]: F(xi) = sin(2 xi)/(2 xi)
    for xi in (0.3, 0.7, 1.9, 2.3, 5.1):
        pv = mu_hat(HALF, xi, tol=1e-9)
        truth = math.sin(2 * xi) / (2 * xi)
        assert pv.lo - 1e-9 <= truth <= pv.hi + 1e-9
        assert float(pv.hi) - float(pv.lo) < 1e-6


def test_functional_equation():
    # F(xi) = cos(xi) * F(t xi)
    for t in (Fraction(1, 3), Fraction(1, 4)):
        m = RecentredMeasure(t)
        for xi in (0.4, 1.3, 3.7):
            full = mu_hat(m, xi, tol=1e-10)
            rec = mu_hat(m, float(t) * xi, tol=1e-10)
            prod_lo = math.cos(xi) * (rec.hi if math.cos(xi) < 0 else rec.lo)
            prod_hi = math.cos(xi) * (rec.lo if math.cos(xi) < 0 else rec.hi)
            assert full.lo - 1e-6 <= prod_hi and prod_lo <= full.hi + 1e-6


def test_symmetry():
    for xi in (0.9, 2.2):
        plus = mu_hat(QUARTER, xi, tol=1e-10)
        minus = mu_hat(QUARTER, -xi, tol=1e-10)
        assert abs(float(plus.lo) - float(minus.lo)) < 1e-8
        assert abs(float(plus.hi) - float(minus.hi)) < 1e-8


def test_exact_zero_detection():
    # t = 1/4, xi = pi/2: the j = 0 factor is cos(pi/2) = 0 exactly
    pv = mu_hat(QUARTER, PiMultiple(Fraction(1, 2)))
    assert pv.zero_flag and pv.lo == pv.hi == 0


def test_transform_bounded_by_one():
    for xi in (0.5, 3.3, 17.9):
        _, _, phi = conv_hat(Fraction(1, 4), Fraction(1, 3), Fraction(2), xi)
        assert -1 <= float(phi.lo) <= float(phi.hi) <= 1


def test_lambda_convention_round_trip():
    a, b = Fraction(1, 4), Fraction(1, 3)
    for lam in (Fraction(1), Fraction(81, 64), Fraction(7, 5)):
        rec = lambda_recentred(a, b, lam)
        assert lambda_unit_interval(a, b, rec) == lam
    assert lambda_recentred(a, b, Fraction(1)) == Fraction(8, 9)


def test_c1_constant_quarter():
    cert = pisot_certificate_for_reciprocal(Fraction(1, 4))
    c1 = c1_constant(Fraction(1, 4), cert)
    # theta = 4 integer: the Pisot side is exactly 1, so c1 equals the
    # small-argument product prod_{k>=1} cos(pi 4^-k) = 0.6935...
    assert 0.6 < float(c1.lo) <= float(c1.hi) <= 0.72
    assert c1.contains(0.69)
    with pytest.raises(ValueError):
        c1_constant(Fraction(1, 2), pisot_certificate_for_reciprocal(Fraction(1, 2)))


def test_phi_at_and_scan_rows():
    a, b = Fraction(1, 4), Fraction(1, 3)
    rows = pisot_scan(a, b, Fraction(1), [(2, 3), (3, 4)])
    assert [r.N for r in rows] == [2, 3]
    assert rows[0].sigma == Fraction(16) - Fraction(27)
    csv = scan_rows_csv(rows)
    header, *lines = csv.strip().split("\n")
    assert header.startswith("N,M,sigma")
    assert len(lines) == 2
    for r in rows:
        ab = abs_enclosure(r.phi)
        assert 0 <= float(ab.lo) <= float(ab.hi) <= 1


@settings(max_examples=25, deadline=None)
@given(xi=st.floats(min_value=-20, max_value=20,
                    allow_nan=False, allow_infinity=False),
       tnum=st.integers(1, 5))
def test_mu_hat_enclosure_properties(xi, tnum):
    m = RecentredMeasure(Fraction(tnum, 11))
    pv = mu_hat(m, xi, tol=1e-8)
    assert -1 <= float(pv.lo) <= float(pv.hi) <= 1
    assert pv.tail_bound >= 0
