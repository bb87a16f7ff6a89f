import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from sphermean.specfun import (
    ExclusionRegion,
    asymptotic_envelope,
    bessel_j,
    bessel_j_complex,
    bessel_j_prime,
    bessel_zeros,
    calibrate_lower_bound_constant,
    lower_bound_check,
    normalized_j,
    normalized_j_prime,
)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.5, 2.0, 3.5])
def test_bessel_j_matches_scipy(nu):
    x = np.linspace(0.01, 60.0, 3001)
    assert np.max(np.abs(bessel_j(nu, x) - special.jv(nu, x))) < 1e-12


def test_normalized_j_half_order_closed_form():
    x = np.linspace(1e-3, 50.0, 5000)
    assert np.max(np.abs(normalized_j(0.5, x) - np.sin(x) / x)) < 1e-12


def test_normalized_j_is_one_at_origin():
    for p in (0.0, 0.5, 1.0, 2.5):
        assert normalized_j(p, np.zeros(1))[0] == 1.0


def test_normalized_j_prime_by_central_difference():
    x = np.linspace(0.5, 20.0, 50)
    h = 1e-5
    fd = (normalized_j(1.0, x + h) - normalized_j(1.0, x - h)) / (2 * h)
    assert np.max(np.abs(normalized_j_prime(1.0, x) - fd)) < 1e-8


def test_bessel_j_prime_matches_scipy():
    x = np.linspace(0.1, 30.0, 300)
    assert np.max(np.abs(bessel_j_prime(1.5, x) - special.jvp(1.5, x))) < 1e-11


@pytest.mark.parametrize("z", [3 + 2j, -4 + 0.5j, 10j, 0.7 - 1.2j])
def test_complex_evaluation_matches_mpmath(z):
    ref = complex(mpmath.besselj(0.5, z))
    assert abs(bessel_j_complex(0.5, z) - ref) <= 1e-11 * max(1.0, abs(ref))


@pytest.mark.parametrize("order", [0, 1, 2, 5])
def test_integer_order_zeros_match_scipy(order):
    z = bessel_zeros(order, 20).as_array()
    assert np.max(np.abs(z - special.jn_zeros(order, 20))) < 1e-10


def test_half_order_zeros_are_multiples_of_pi():
    z = bessel_zeros(0.5, 10).as_array()
    assert np.max(np.abs(z - math.pi * np.arange(1, 11))) < 1e-10


def test_zero_table_is_increasing_and_simple():
    t = bessel_zeros(1.5, 30)
    z = t.as_array()
    assert len(t) == 30 and np.all(np.diff(z) > 0)
    assert np.all(np.abs(bessel_j(1.5, z)) < 1e-12)
    assert np.all(np.abs(bessel_j_prime(1.5, z)) > 1e-3)


def test_zero_arguments_are_validated():
    with pytest.raises(ValueError):
        bessel_zeros(0.0, 5, tol=0.0)


def test_exclusion_region_contains_real_zeros_and_mirrors():
    region = ExclusionRegion(0.5, 1.0)
    for z in bessel_zeros(0.5, 8).as_array():
        assert region.contains(z) and region.contains(-z)
    assert region.contains(0.3j)
    assert not region.contains(20j)


def test_lower_bound_classification():
    C = calibrate_lower_bound_constant(0.5)
    assert C > 0
    assert lower_bound_check(0.5, bessel_zeros(0.5, 3)[2], C) == "in_exclusion"
    assert lower_bound_check(0.0, 15j, 0.1) == "holds"
    assert lower_bound_check(0.5, 4.5 * math.pi, 10.0) == "fails"
    with pytest.raises(ValueError):
        lower_bound_check(0.5, 2.0, -1.0)


def test_envelope_stays_bounded():
    env = [asymptotic_envelope(3, 2, T, samples=256) for T in (4, 16, 64, 256)]
    assert max(env) / min(env) < 4.0
    with pytest.raises(ValueError):
        asymptotic_envelope(3, 2, 0.5)


@settings(max_examples=60, deadline=None)
@given(p=st.floats(0.0, 4.0), x=st.floats(0.0, 200.0))
def test_normalized_j_bounded_by_one(p, x):
    assert abs(normalized_j(p, np.array([x]))[0]) <= 1.0 + 1e-12


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(1.0, 5.0), x=st.floats(0.5, 80.0))
def test_three_term_recurrence(nu, x):
    lhs = bessel_j(nu - 1, x) + bessel_j(nu + 1, x)
    rhs = 2 * nu / x * bessel_j(nu, x)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, 2 * nu / x)
