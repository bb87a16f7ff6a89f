import numpy as np
import pytest

from sphermean import phantoms as ph
from sphermean.inversion import (
    CounterexampleSpec,
    HarnessConfig,
    NotRConvexError,
    RegularizationPolicy,
    deconvolve,
    lp_annulus_tails,
    rconvex_region_growing,
    ring_mass_fraction,
    support_theorem_harness,
    zalcman_field,
)
from sphermean.transform import SphereKernel, fixed_radius_transform


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_policy_parsing():
    assert RegularizationPolicy.parse("zero").strategy == "zero_fill"
    assert RegularizationPolicy.parse("tikhonov:1e-3").epsilon == 1e-3
    for bad in ("tikhonov:-1", "wiener", "tikhonov:x"):
        with pytest.raises(ValueError):
            RegularizationPolicy.parse(bad)


@pytest.mark.parametrize("policy", ["zero", "tikhonov:1e-6"])
def test_roundtrip_on_ring_avoiding_phantom(policy):
    f = ph.gaussian(2, 256, 0.1, sigma=1.0)
    k = SphereKernel(0.7, 2)
    assert ring_mass_fraction(f, k) < 1e-3
    res = deconvolve(fixed_radius_transform(f, k), k, RegularizationPolicy.parse(policy))
    assert _rel(res.field.values, f.values) < 5e-2
    assert res.warning is None


def test_discarded_fraction_bookkeeping():
    k = SphereKernel(0.7, 2)
    # narrow phantom: most energy on the rings, warning raised
    narrow = ph.gaussian(2, 128, 0.02, sigma=0.05)
    res = deconvolve(fixed_radius_transform(narrow, k), k)
    assert res.discarded_fraction > 0.5 and res.warning
    # zero field discards nothing
    zero = narrow.with_values(np.zeros(narrow.shape))
    res0 = deconvolve(zero, k)
    assert res0.discarded_fraction == 0.0 and not np.any(res0.field.values)


def test_counterexample_spec():
    spec = CounterexampleSpec.from_zero_index(2, 0)
    assert spec.critical_p == 4.0
    assert spec.profile(np.zeros(1))[0] == pytest.approx(1.0)
    assert CounterexampleSpec.from_zero_index(3, 0).critical_p == 3.0
    with pytest.raises(ValueError):
        CounterexampleSpec(2, 3.0)


def test_tail_trend_brackets_critical_exponent():
    f = zalcman_field(CounterexampleSpec.from_zero_index(2, 2), (512, 512), 0.04)
    t0 = [2.0, 3.0, 4.0, 5.0]
    assert np.all(np.diff(lp_annulus_tails(f, 5.0, t0)) < 0)
    assert np.all(np.diff(lp_annulus_tails(f, 3.5, t0)) > 0)


def test_support_harness_on_counterexample():
    f = zalcman_field(CounterexampleSpec.from_zero_index(2, 0), (512, 512), 0.02)
    K = ph.disk_mask(2, 512, 0.02, 1.0)
    rep = support_theorem_harness(f, HarnessConfig(K, 1.0))
    # means vanish but f is not compactly supported: the conclusion fails
    # legitimately, outside the theorem's hypotheses
    assert rep.hypothesis_max < 1e-3
    assert rep.status == "conclusion-violated"
    assert rep.regime == "non-compact"
    assert not rep.implementation_failure
    assert rep.tails


def test_support_harness_compact_pass_and_witness():
    N, h = 192, 0.02
    K = ph.disk_mask(2, N, h, 1.0)
    cfg = HarnessConfig(K, 0.5)
    inner = ph.radial_bump(2, N, h, 0.9)
    assert support_theorem_harness(inner, cfg).status == "consistent-pass"
    c = np.array([1.3, 0.0])
    rep = support_theorem_harness(ph.add(inner, ph.radial_bump(2, N, h, 0.12, c)), cfg)
    assert rep.status == "hypothesis-violated"
    assert np.linalg.norm(np.asarray(rep.witness_point) - c) <= 0.12 + 2 * h


def test_harness_rejects_mismatched_mask():
    f = ph.gaussian(2, 64, 0.05)
    with pytest.raises(ValueError):
        support_theorem_harness(f, HarnessConfig(ph.disk_mask(2, 64, 0.04, 0.5), 0.5))


def test_walk_requires_r_convex_mask():
    K = ph.two_disk_mask(256, 0.02)
    f = ph.grid(2, 256, 0.02)
    with pytest.raises(NotRConvexError):
        rconvex_region_growing(f, HarnessConfig(K, 0.5))
