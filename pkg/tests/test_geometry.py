import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphermean import phantoms as ph
from sphermean.geometry import (
    BallElement,
    DomainMask,
    brute_force_r_convex,
    center_set,
    connected_components,
    dilate,
    erode,
    r_convex,
)
from sphermean.suites import hexagon_mask


def test_ball_footprint_counts():
    assert BallElement(1.0).footprint(2).sum() == 5
    assert BallElement(1.0).footprint(3).sum() == 7
    # ties at exactly the radius are inside
    assert BallElement(5.0).footprint(2).sum() == 81


def test_erode_dilate_duality():
    rng = np.random.default_rng(3)
    m = DomainMask.centered(rng.random((40, 40)) > 0.4, 1.0)
    ball = BallElement(2.5)
    assert np.array_equal(erode(m, ball).values, ~dilate(m.complement(), ball).values)


def test_morphology_special_cases():
    empty = DomainMask.centered(np.zeros((16, 16), bool), 1.0)
    full = empty.complement()
    ball = BallElement(2.0)
    assert not dilate(empty, ball).values.any()
    assert erode(full, ball).values.all()
    with pytest.raises(ValueError):
        erode(full, BallElement(20.0))


def test_dilation_of_point_is_lattice_ball():
    v = np.zeros((21, 21), bool)
    v[10, 10] = True
    out = dilate(DomainMask.centered(v, 1.0), BallElement(4.0)).values
    assert np.array_equal(out[6:15, 6:15], BallElement(4.0).footprint(2))
    assert out.sum() == BallElement(4.0).footprint(2).sum()


@pytest.mark.parametrize("R", [0.2, 0.5, 1.5, 3.0])
def test_convex_shapes_are_r_convex(R):
    for K in (ph.disk_mask(2, 128, 0.05, 1.0), ph.square_mask(2, 128, 0.05, 0.8), hexagon_mask(128, 0.05)):
        assert r_convex(K, R).is_r_convex


def test_two_disks_fail_with_witness_in_gap():
    K = ph.two_disk_mask(256, 0.02, 1.0, 2.5)
    v = r_convex(K, 0.5)
    assert v.status == "coverage_fail_witness"
    x, y = v.witness_point
    assert abs(x) < 0.25 and abs(y) < 0.5


def test_r_convex_preconditions():
    K = ph.disk_mask(2, 64, 0.05, 1.0)
    with pytest.raises(ValueError):
        r_convex(K, 0.05)
    with pytest.raises(ValueError):
        r_convex(K.with_values(np.zeros(K.shape, bool)), 0.5)
    with pytest.raises(ValueError):
        r_convex(ph.square_mask(2, 64, 0.05, 2.0), 0.5)


def test_center_set_avoids_k():
    K = ph.disk_mask(2, 128, 0.05, 1.0)
    C = center_set(K, 0.5)
    from scipy.spatial import cKDTree

    X = K.coords().reshape(2, -1).T
    d, _ = cKDTree(X[K.values.ravel()]).query(X[C.values.ravel()])
    assert C.values.any() and d.min() > 0.5


def test_connected_components():
    v = np.zeros((10, 10), bool)
    v[1:3, 1:3] = True
    v[6:9, 6:9] = True
    v[3, 3] = True  # diagonal touch only
    comps = connected_components(v)
    assert comps.count == 3 and sorted(comps.sizes) == [1, 4, 9]


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), R=st.floats(2.0, 6.0))
def test_verdict_matches_brute_force(seed, R):
    K = ph.random_blob_mask((48, 48), np.random.default_rng(seed))
    assert r_convex(K, R).status == brute_force_r_convex(K, R)
