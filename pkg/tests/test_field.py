import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphermean import phantoms as ph
from sphermean.field import (
    GridField,
    GuardBandError,
    OutOfDomainError,
    RadialProfile,
    convolve_radial,
    fft_forward,
    fft_inverse,
    harmonic_project,
    load_field,
    load_profile_csv,
    radialize,
    sample,
    save_field,
    save_profile_csv,
    shift_linear,
    sidecar_path,
    sphere_quadrature,
)


def test_grid_field_validation_and_readonly():
    with pytest.raises(ValueError):
        GridField(np.zeros(16), 0.1, (0.0,))
    with pytest.raises(ValueError):
        GridField(np.zeros((4, 4)), 0.1, (0.0, 0.0))
    f = GridField.centered(np.zeros((16, 16)), 0.1)
    assert f.origin == (-0.8, -0.8)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_field_file_roundtrip(tmp_path):
    f = ph.gaussian(3, (8, 10, 12), 0.05, sigma=0.1)
    path = tmp_path / "f.bin"
    save_field(path, f)
    assert path.stat().st_size == 8 * 10 * 12 * 8
    assert np.array_equal(np.fromfile(path, "<f8").reshape(f.shape), f.values)
    g = load_field(path)
    assert g.shape == f.shape and g.spacing == f.spacing and g.origin == f.origin
    assert np.array_equal(g.values, f.values)
    assert sidecar_path(path).exists()


def test_field_file_size_mismatch(tmp_path):
    f = ph.gaussian(2, 16, 0.1)
    save_field(tmp_path / "f.bin", f)
    np.zeros(10).tofile(tmp_path / "f.bin")
    with pytest.raises(ValueError):
        load_field(tmp_path / "f.bin")


def test_profile_csv_roundtrip(tmp_path):
    prof = RadialProfile.from_function(lambda r: np.cos(r), 2.0, 33)
    save_profile_csv(tmp_path / "p.csv", prof)
    r_max, vals = load_profile_csv(tmp_path / "p.csv")
    assert r_max == 2.0 and np.array_equal(vals, prof.values)


def test_fft_roundtrip():
    f = ph.gaussian(2, (32, 48), 0.05)
    back = fft_inverse(fft_forward(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-14


@pytest.mark.parametrize("dim", [2, 3])
def test_sphere_quadrature_moments(dim):
    q = sphere_quadrature(dim, 32)
    assert abs(q.weights.sum() - 1.0) < 1e-14
    for i in range(dim):
        assert abs(q.integrate(lambda d, i=i: d[..., i] ** 2) - 1.0 / dim) < 1e-12
        assert abs(q.integrate(lambda d, i=i: d[..., i] ** 3)) < 1e-12


def test_radialize_gaussian():
    f = ph.gaussian(2, 256, 0.01, sigma=0.3)
    prof = radialize(f, 64, r_max=1.0)
    exact = np.exp(-prof.radii() ** 2 / (2 * 0.09))
    # multilinear interpolation bound: n h^2 max|f''| / 8
    bound = 2 * 0.01 ** 2 * (1 / 0.09) / 8
    assert np.max(np.abs(prof.values - exact)) < bound
    assert prof.valid.all()


def test_harmonic_channels_do_not_leak():
    f = ph.grid(2, 256, 0.01)
    X, Y = f.coords()
    r = np.hypot(X, Y)
    g = np.exp(-r ** 2 / 0.18) * r ** 2
    f = f.with_values(g * np.cos(2 * np.arctan2(Y, X)))
    expect = RadialProfile.from_function(lambda s: np.exp(-s ** 2 / 0.18) * s ** 2 / np.sqrt(2), 1.0, 32)
    for m in range(6):
        for l in (1, 2) if m else (1,):
            c = harmonic_project(f, m, l, profile_count=32, r_max=1.0)
            if (m, l) == (2, 1):
                assert np.max(np.abs(c.values - expect.values)) < 2e-4
            else:
                assert np.max(np.abs(c.values)) < 2e-4


def test_sample_outside_policy():
    f = ph.gaussian(2, 32, 0.1)
    far = np.array([[10.0, 0.0]])
    with pytest.raises(OutOfDomainError):
        sample(f, far)
    assert sample(f, far, outside="zero")[0] == 0.0


@settings(max_examples=40, deadline=None)
@given(sx=st.integers(-5, 5), sy=st.integers(-5, 5))
def test_integer_shift_is_exact(sx, sy):
    rng = np.random.default_rng(abs(sx) * 11 + abs(sy))
    v = rng.standard_normal((20, 20))
    out = shift_linear(v, (sx, sy))
    expect = np.zeros_like(v)
    # out[i] = v[i + shift]
    src = v[max(0, sx):20 - max(0, -sx), max(0, sy):20 - max(0, -sy)]
    expect[max(0, -sx):20 - max(0, sx), max(0, -sy):20 - max(0, sy)] = src
    assert np.allclose(out, expect, atol=1e-14)


def test_convolve_radial_guard_band():
    f = ph.gaussian(2, 32, 0.1)
    with pytest.raises(GuardBandError):
        convolve_radial(f, lambda r: np.ones_like(r), 2.0)
    out = convolve_radial(f, lambda r: np.ones_like(r), 0.0)
    assert np.allclose(out.values, f.values * 0.01)


def test_profile_requires_enough_samples():
    with pytest.raises(ValueError):
        RadialProfile(1.0, np.zeros(8))
