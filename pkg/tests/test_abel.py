import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphermean.abel import (
    AbelParams,
    EvenProfile,
    OffsetProfile,
    UnsupportedConfigurationError,
    abel_forward,
    abel_inverse,
    convolution_identity_check,
    local_theorem_pipeline,
    smooth_bump,
    titchmarsh_forward_check,
)
from sphermean.field import RadialProfile


@pytest.mark.parametrize("dim", [2, 3])
def test_forward_of_constant_is_constant(dim):
    f = abel_forward(EvenProfile.from_function(np.ones_like, 1.0, 65), AbelParams(dim, singular_quadrature=dim == 2))
    assert np.max(np.abs(f.values - 1.0)) < 1e-12


@pytest.mark.parametrize("dim", [2, 3])
def test_forward_of_square_is_second_moment(dim):
    # average of <x, e>^2 over directions is |x|^2 / n
    f = abel_forward(EvenProfile.from_function(lambda p: p ** 2, 1.0, 65), AbelParams(dim, singular_quadrature=dim == 2))
    r = f.radii()
    assert np.max(np.abs(f.values - r ** 2 / dim)) < 1e-12


@settings(max_examples=15, deadline=None)
@given(c=st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_inverse_undoes_forward_on_even_polynomials(c):
    params = AbelParams(3)
    g = EvenProfile.from_function(lambda p: np.polyval(c[::-1], p ** 2), 1.0, 401)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        back = abel_inverse(abel_forward(g, params), params)
    sel = g.points() >= 0.1
    scale = max(1.0, float(np.max(np.abs(g.values))))
    assert np.max(np.abs(back.values - g.values)[sel]) < 1e-6 * scale


def test_inverse_flags_rough_input():
    rough = RadialProfile(1.0, np.random.default_rng(1).standard_normal(200))
    with pytest.warns(RuntimeWarning):
        g = abel_inverse(rough, AbelParams(3))
    assert g.warnings


def test_unsupported_configurations():
    with pytest.raises(UnsupportedConfigurationError):
        AbelParams(2)
    with pytest.raises(ValueError):
        AbelParams(4)


def test_convolution_identity_constant():
    params = AbelParams(3)
    g = EvenProfile.from_function(lambda p: np.exp(-p ** 2 / 0.18), 4.0, 801)
    rep = convolution_identity_check(g, params)
    assert rep.spread < 1e-3
    assert abs(rep.constant - params.omega_ratio) < 1e-6
    assert abs(params.omega_ratio - 0.5) < 1e-15


@pytest.mark.parametrize("n", [2, 3])
def test_titchmarsh_onset(n):
    step = 0.005
    pts = np.arange(0.9, 2.1 + step / 2, step)
    rep = titchmarsh_forward_check(OffsetProfile(0.9, step, smooth_bump(pts, 1.2, 1.5)), n, (1.2, 1.5))
    assert rep.error_steps <= 2.0


def test_local_pipeline_statuses():
    eps = 0.2
    vanish = RadialProfile.from_function(np.zeros_like, 2.0, 401)
    assert local_theorem_pipeline(vanish, eps).status == "pass"
    inside = RadialProfile.from_function(lambda r: smooth_bump(r, 1.05, 1.1), 2.0, 401)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = local_theorem_pipeline(inside, eps)
    assert rep.status == "hypothesis_flagged" and rep.witness_center


def test_local_pipeline_requires_vanishing_core():
    bad = RadialProfile.from_function(lambda r: np.exp(-r ** 2), 2.0, 401)
    with pytest.raises(ValueError):
        local_theorem_pipeline(bad, 0.2)


def test_even_profile_vanishes_beyond_support():
    g = EvenProfile.from_function(np.cos, 1.0, 65)
    assert g(np.array([1.5]))[0] == 0.0
    assert abs(g(np.array([-0.3]))[0] - np.cos(0.3)) < 1e-6
