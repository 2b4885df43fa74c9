import math
from fractions import Fraction

import pytest

from cantorconv.algebraic import (IntPolynomial, NotPisot, certify_pisot,
                                  epsilon_constant,
                                  pisot_certificate_for_reciprocal,
                                  power_distance)

GOLDEN = IntPolynomial((-1, -1, 1))      # x^2 - x - 1
PLASTIC = IntPolynomial((-1, -1, 0, 1))  # x^3 - x - 1


def test_polynomial_validation():
    with pytest.raises(ValueError):
        IntPolynomial((3,))
    with pytest.raises(ValueError):
        IntPolynomial((-1, -1, 2))  # not monic
    assert IntPolynomial((-3, 1)).degree == 1


def test_integer_pisot():
    cert = certify_pisot(IntPolynomial((-3, 1)))
    assert cert.r == 0
    assert cert.theta.contains(3.0)
    assert float(cert.gamma.hi) == 0.0
    assert power_distance(cert, 17).hi == 0


def test_golden_ratio_certificate():
    cert = certify_pisot(GOLDEN)
    phi = (1 + math.sqrt(5)) / 2
    assert cert.theta.contains(phi)
    assert cert.r == 1
    assert cert.gamma.contains(phi - 1)  # conjugate is 1 - phi
    assert abs(float(cert.gamma.hi) - 0.6180339887498949) < 1e-12


def test_golden_power_distance():
    cert = certify_pisot(GOLDEN)
    # theta^10 = 122.991869..., nearest integer L_10 = 123
    d = power_distance(cert, 10)
    gamma10 = ((math.sqrt(5) - 1) / 2) ** 10
    assert d.contains(gamma10)
    assert float(d.width) < 1e-12


def test_plastic_number_certificate():
    cert = certify_pisot(PLASTIC)
    assert cert.theta.contains(1.3247179572447460)
    assert cert.r == 2
    assert float(cert.gamma.hi) < 1.0


def test_non_pisot_rejected():
    # x^2 - x - 3 has conjugate about -1.3028 outside the unit disc
    with pytest.raises(NotPisot):
        certify_pisot(IntPolynomial((-3, -1, 1)))
    # reducible: x^2 - 1
    with pytest.raises(NotPisot):
        certify_pisot(IntPolynomial((-1, 0, 1)))
    # no root above 1: x + 2
    with pytest.raises(NotPisot):
        certify_pisot(IntPolynomial((2, 1)))


def test_power_sum_recurrence():
    cert = certify_pisot(GOLDEN)
    s = cert.power_sum_sequence(10)
    # Lucas numbers: 2, 1, 3, 4, 7, 11, ...
    assert s[:7] == [2, 1, 3, 4, 7, 11, 18]
    assert s[10] == 123


def test_distance_bound_golden_and_plastic():
    # the golden ratio attains dist(theta^n, Z) = gamma^n exactly, so the
    # comparison must absorb the enclosures' outward rounding slack
    for poly in (GOLDEN, PLASTIC):
        cert = certify_pisot(poly)
        gam = float(cert.gamma.hi)
        for n in range(1, 41):
            d = power_distance(cert, n)
            assert float(d.hi) <= cert.r * gam**n * (1 + 1e-9) + 1e-18


def test_reciprocal_certificates_and_epsilon():
    for b, theta in ((Fraction(1, 3), 3), (Fraction(1, 4), 4)):
        cert = pisot_certificate_for_reciprocal(b)
        assert cert is not None and cert.theta.contains(theta)
        eps = epsilon_constant(cert)
        assert eps.lo == eps.hi == Fraction(1, 4)
    assert pisot_certificate_for_reciprocal(Fraction(2, 5)) is None


def test_epsilon_golden_positive():
    eps = epsilon_constant(certify_pisot(GOLDEN))
    assert 0 < float(eps.lo) <= float(eps.hi) <= 0.25
