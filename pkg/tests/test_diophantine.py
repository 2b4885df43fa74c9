import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp

from cantorconv.diophantine import (contfrac, find_lambda, log_ratio_cf,
                                    mp_enclosure, ratio_class, verify_witness)


def test_contfrac_sqrt2():
    cf = contfrac(mp_enclosure(lambda: mp.sqrt(2)), 8)
    assert cf.quotients == (1, 2, 2, 2, 2, 2, 2, 2)
    assert not cf.truncated
    # convergents recomputed by the recurrence: 1/1, 3/2, 7/5, 17/12, ...
    assert cf.convergents[:4] == ((1, 1), (3, 2), (7, 5), (17, 12))


def test_contfrac_log_ratio():
    cf = log_ratio_cf(Fraction(1, 4), Fraction(1, 3), 5)
    # log 3 / log 4 = [0; 1, 3, 1, 4, ...]
    assert cf.quotients == (0, 1, 3, 1, 4)
    p, q = cf.convergents[-1]
    assert abs(p / q - math.log(3) / math.log(4)) < 1e-3


def test_ratio_class_examples():
    assert ratio_class(Fraction(1, 4), Fraction(1, 2)) == ("rational", Fraction(1, 2))
    assert ratio_class(Fraction(1, 9), Fraction(1, 3)) == ("rational", Fraction(1, 2))
    assert ratio_class(Fraction(1, 4), Fraction(1, 3))[0] == "irrational"
    assert ratio_class(Fraction(4, 9), Fraction(2, 3)) == ("rational", Fraction(1, 2))
    assert ratio_class(Fraction(1, 3), Fraction(67, 200))[0] == "irrational"
    with pytest.raises(ValueError):
        ratio_class(Fraction(3, 2), Fraction(1, 3))


def test_verify_witness_examples():
    a, b = Fraction(1, 4), Fraction(1, 3)
    res, ok = verify_witness(a, b, Fraction(1), Fraction(1, 4), (3, 4))
    assert res == 17 and not ok  # |4^3 - 3^4| = 17
    res, ok = verify_witness(a, b, Fraction(81, 64), Fraction(1, 4), (3, 4))
    assert res == 0 and ok


def test_find_lambda_rejects_rational_ratio():
    with pytest.raises(ValueError):
        find_lambda(Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))


def test_find_lambda_default_construction():
    a, b = Fraction(1, 4), Fraction(1, 3)
    wl = find_lambda(a, b, Fraction(1, 4), K=3)
    assert wl.complete and len(wl.pairs) == 3
    assert wl.lam_exact is not None
    ns = [w.n for w in wl.pairs]
    assert ns == sorted(ns) and len(set(ns)) == 3
    for w in wl.pairs:
        res, ok = verify_witness(a, b, wl.lam_exact, wl.epsilon, (w.n, w.m))
        assert ok and res == w.residual_hi
    assert wl.lam_lo <= wl.lam_exact <= wl.lam_hi
    # the last anchor is lambda itself, with exactly zero residual
    assert wl.pairs[-1].residual_hi == 0


def test_find_lambda_json_round_trip():
    import json
    wl = find_lambda(Fraction(1, 4), Fraction(1, 3), Fraction(1, 4), K=2)
    data = json.loads(wl.to_json())
    assert data["complete"] is True
    assert data["epsilon"] == "1/4"
    assert len(data["pairs"]) == 2
    assert Fraction(data["lambda_exact"]) == wl.lam_exact


@settings(max_examples=40, deadline=None)
@given(p=st.integers(2, 40), q=st.integers(2, 40), k=st.integers(1, 4))
def test_ratio_class_powers_are_rational(p, q, k):
    # b = a^(1/k) arrangements: log b / log a must come out rational
    a = Fraction(1, p * q)
    b = a ** k
    kind, val = ratio_class(a, b)
    assert kind == "rational" and val == k
