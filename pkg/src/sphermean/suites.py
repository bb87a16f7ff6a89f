"""Verification suites shared by ``sphermean verify`` and the acceptance tests.

Every check returns a :class:`CheckResult` with its metrics, the threshold it
was held to and any witnesses.  Seeds only move randomized placements; all
grids and tolerances are fixed here.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import mpmath
import numpy as np

from . import phantoms as ph
from .abel import (
    AbelParams,
    EvenProfile,
    OffsetProfile,
    abel_forward,
    abel_inverse,
    convolution_identity_check,
    local_theorem_pipeline,
    smooth_bump,
    titchmarsh_forward_check,
)
from .field import GridField, RadialProfile, radialize, sphere_quadrature
from .geometry import brute_force_r_convex, r_convex
from .inversion import (
    CounterexampleSpec,
    HarnessConfig,
    deconvolve,
    lp_annulus_tails,
    rconvex_region_growing,
    ring_mass_fraction,
    support_theorem_harness,
    zalcman_field,
    zalcman_product_check,
)
from .specfun import (
    asymptotic_envelope,
    bessel_j,
    bessel_zeros,
    calibrate_lower_bound_constant,
    lower_bound_check,
    normalized_j,
    normalized_j_prime,
)
from .transform import (
    RepresentationKernel,
    SphereKernel,
    fixed_radius_transform,
    interior_mask,
    quadrature_transform,
    representation_check,
    spectral_ring_check,
    spherical_means,
)

# first positive zero of J_0, from the mpmath bisection oracle below
J0_FIRST_ZERO = 2.404825557695773


@dataclass
class CheckResult:
    name: str
    passed: bool
    metrics: dict = dc_field(default_factory=dict)
    witnesses: list = dc_field(default_factory=list)
    config: dict = dc_field(default_factory=dict)


@dataclass
class SuiteResult:
    suite: str
    checks: list
    config: dict = dc_field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def as_report(self):
        metrics = {c.name: dict(c.metrics, passed=c.passed) for c in self.checks}
        witnesses = [dict(w, check=c.name) for c in self.checks for w in c.witnesses]
        # a failing check always leaves a trace, even without a spatial witness
        witnesses += [{"kind": "failed_check", "check": c.name}
                      for c in self.checks if not c.passed and not c.witnesses]
        config = dict(self.config)
        config["checks"] = {c.name: c.config for c in self.checks}
        return {"suite": self.suite, "config": config, "metrics": metrics,
                "witnesses": witnesses, "pass": self.passed}


def _j0_series_mp(x):
    x = mpmath.mpf(x)
    term = mpmath.mpf(1)
    total = term
    k = 0
    while abs(term) > mpmath.mpf(10) ** (-mpmath.mp.dps):
        k += 1
        term *= -(x * x) / (4 * k * k)
        total += term
    return total


def j0_first_zero_oracle():
    """Bisection of the high-precision power series of ``J_0`` on ``[2, 3]``."""
    with mpmath.workdps(40):
        a, b = mpmath.mpf(2), mpmath.mpf(3)
        fa = _j0_series_mp(a)
        for _ in range(120):
            mid = (a + b) / 2
            fm = _j0_series_mp(mid)
            if (fm > 0) == (fa > 0):
                a, fa = mid, fm
            else:
                b = mid
        return float((a + b) / 2)


# criterion 1 -------------------------------------------------------------

def check_special_functions():
    x = 50.0 * np.arange(1, 5001) / 5000
    err_j = float(np.max(np.abs(normalized_j(0.5, x) - np.sin(x) / x)))
    zeros = bessel_zeros(0.5, 10).as_array()
    err_z = float(np.max(np.abs(zeros - math.pi * np.arange(1, 11))))
    oracle = j0_first_zero_oracle()
    err_0 = abs(bessel_zeros(0.0, 1)[0] - oracle)
    err_frozen = abs(oracle - J0_FIRST_ZERO)
    ok = err_j <= 1e-12 and err_z <= 1e-10 and err_0 <= 1e-10 and err_frozen <= 1e-12
    return CheckResult("special_functions", ok,
                       {"j_half_abs_err": err_j, "zeros_half_abs_err": err_z,
                        "j0_first_zero_err": err_0, "oracle_vs_frozen": err_frozen},
                       config={"tol_j": 1e-12, "tol_zero": 1e-10, "x_range": [0.01, 50.0]})


def check_specfun_invariants():
    metrics = {}
    ok = True
    # simple zeros for every order the transforms use
    orders = [0.0, 0.5] + sorted({n / 2 + m - 1 for n in (2, 3) for m in range(9)})
    worst = math.inf
    for p in orders:
        z = bessel_zeros(p, 5).as_array()
        worst = min(worst, float(np.min(np.abs(normalized_j_prime(p, z)))))
    metrics["min_abs_derivative_at_zeros"] = worst
    ok &= worst > 1e-6
    # half-integer closed forms
    x = 50.0 * np.arange(1, 2001) / 2000
    j32 = np.sqrt(2 / (math.pi * x)) * (np.sin(x) / x - np.cos(x))
    e_half = float(np.max(np.abs(bessel_j(0.5, x) - np.sqrt(2 / (math.pi * x)) * np.sin(x))))
    e_3half = float(np.max(np.abs(bessel_j(1.5, x) - j32)))
    metrics["half_integer_err"] = max(e_half, e_3half)
    ok &= max(e_half, e_3half) <= 1e-10
    # envelope boundedness proxy
    ratios = []
    for n in (2, 3):
        for m in (0, 2, 8):
            env = [asymptotic_envelope(n, m, T, samples=512) for T in (4, 8, 16, 32, 64, 128, 256)]
            ratios.append(max(env) / min(env))
    metrics["envelope_max_ratio"] = float(max(ratios))
    ok &= max(ratios) < 4.0
    # lower bound: real zeros excluded, imaginary axis and between-disk points hold
    C = calibrate_lower_bound_constant(0.5)
    zeros_excluded = all(lower_bound_check(0.5, z, C) == "in_exclusion"
                         for z in bessel_zeros(0.5, 8).as_array())
    imag_holds = all(lower_bound_check(0.0, 1j * y, 0.1) == "holds" for y in (5.0, 10.0, 20.0))
    mids = [0.5 * (math.pi * (k + 1.0) + math.pi * (k + 2.0)) for k in range(1, 8)]
    mid_holds = all(lower_bound_check(0.5, x, C) == "holds" for x in mids)
    metrics.update(zeros_excluded=zeros_excluded, imaginary_axis_holds=imag_holds,
                   between_disks_hold=mid_holds, calibrated_C=C)
    ok &= zeros_excluded and imag_holds and mid_holds
    return CheckResult("specfun_invariants", bool(ok), metrics)


# criteria 2-4 ------------------------------------------------------------

def check_multiplier_equivalence():
    f = ph.gaussian(2, 256, 0.01, sigma=0.1)
    kernel = SphereKernel(0.7, 2)
    h = fixed_radius_transform(f, kernel)
    q = quadrature_transform(f, kernel, sphere_quadrature(2, 1024))
    m = interior_mask(f, kernel.R)
    dev = float(np.max(np.abs(h.values[m] - q.values[m])) / np.max(np.abs(q.values[m])))
    hp = fixed_radius_transform(f, kernel, crop=False)
    mean_err = abs(float(hp.values.sum()) / float(f.values.sum()) - 1.0)
    dc = float(kernel.multiplier(np.zeros(1))[0])
    ok = dev <= 1e-3 and mean_err <= 1e-12 and dc == 1.0
    return CheckResult("multiplier_equivalence", ok,
                       {"interior_rel_dev": dev, "mean_rel_err": mean_err, "dc_multiplier": dc,
                        "interior_voxels": int(m.sum())},
                       config={"shape": [256, 256], "spacing": 0.01, "sigma": 0.1, "R": 0.7,
                               "quadrature_nodes": 1024, "interpolation": "multilinear", "tol": 1e-3})


def check_representation():
    R = 0.7
    metrics = {}
    ok = True
    for idx in (0, 1):
        rep = RepresentationKernel.from_zero_index(R, 2, idx)
        coarse = representation_check(ph.gaussian(2, 128, 0.02, sigma=0.1), rep)
        fine = representation_check(ph.gaussian(2, 256, 0.01, sigma=0.1), rep)
        gain = coarse.residual / fine.residual
        metrics[f"zero{idx}"] = {"residual_256": fine.residual, "residual_128": coarse.residual,
                                 "refinement_gain": gain, "constant": fine.constant,
                                 "analytic_constant": fine.analytic_constant}
        ok &= fine.residual <= 1e-2 and gain >= 2.0 and not fine.degenerate
    return CheckResult("representation", bool(ok), metrics,
                       config={"R": R, "sigma": 0.1, "grids": [[128, 0.02], [256, 0.01]],
                               "tol": 1e-2, "min_gain": 2.0})


def _ring_phantoms():
    a = ph.gaussian(2, 256, 0.01, sigma=0.1)
    b = ph.add(ph.radial_bump(2, 256, 0.01, 0.3, (0.2, -0.1)),
               ph.radial_bump(2, 256, 0.01, 0.2, (-0.25, 0.15), amplitude=-0.6))
    return {"gaussian": a, "bump_pair": b}


def check_zero_rings():
    kernel = SphereKernel(0.7, 2)
    metrics = {}
    ok = True
    for name, f in _ring_phantoms().items():
        h = fixed_radius_transform(f, kernel)
        on = spectral_ring_check(h, kernel, 3)
        neg = spectral_ring_check(f, kernel, 3)
        metrics[name] = {"ring_maxima": list(on.maxima), "control_maxima": list(neg.maxima)}
        ok &= max(on.maxima) <= 1e-2 and min(neg.maxima) >= 1e-1
    return CheckResult("zero_rings", bool(ok), metrics,
                       config={"R": 0.7, "k_max": 3, "method": "ring", "tol": 1e-2, "control_min": 1e-1})


# criterion 5 -------------------------------------------------------------

def check_zalcman(seed=7):
    rng = np.random.default_rng(seed)
    spec = CounterexampleSpec.from_zero_index(2, 0)
    f = zalcman_field(spec, (512, 512), 0.01)
    fmax = float(np.max(np.abs(f.values)))
    centers = rng.uniform(-1.4, 1.4, size=(100, 2))
    means = spherical_means(f, centers, 1.0, sphere_quadrature(2, 512))
    worst = int(np.argmax(np.abs(means)))
    mean_ratio = float(np.abs(means[worst]) / fmax)
    prod = zalcman_product_check(f, spec, rng.uniform(-0.8, 0.8, size=(20, 2)),
                                 np.linspace(0.2, 1.5, 14), sphere_quadrature(2, 512))
    spec3 = CounterexampleSpec.from_zero_index(2, 2)
    tail_field = zalcman_field(spec3, (512, 512), 0.04)
    t0 = [2.0, 3.0, 4.0, 5.0]
    above = lp_annulus_tails(tail_field, 5.0, t0)
    below = lp_annulus_tails(tail_field, 3.5, t0)
    dec = bool(np.all(np.diff(above) < 0))
    inc = bool(np.all(np.diff(below) > 0))
    ok = mean_ratio <= 1e-4 and prod.max_rel_error <= 1e-3 and dec and inc
    return CheckResult(
        "zalcman", ok,
        {"max_mean_ratio": mean_ratio, "product_rel_err": prod.max_rel_error,
         "product_constant": prod.constant, "analytic_constant": prod.analytic_constant,
         "tails_p5": above.tolist(), "tails_p3_5": below.tolist(),
         "p5_decreasing": dec, "p3_5_increasing": inc, "critical_p": spec.critical_p},
        [{"kind": "largest_mean_center", "point": centers[worst].tolist()}],
        config={"seed": seed, "lam": spec.lam, "shape": [512, 512], "spacing": 0.01,
                "tail_lam": spec3.lam, "tail_spacing": 0.04, "t0": t0})


# criterion 6 -------------------------------------------------------------

def _even_polys(rng):
    base = [[1.0], [0.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0, 1.0], [1.0, -1.0]]
    base += [list(rng.uniform(-1, 1, 4)) for _ in range(3)]
    return base


def check_abel(seed=7):
    rng = np.random.default_rng(seed)
    params = AbelParams(3)
    metrics = {}
    worst_rt = 0.0
    for coeffs in _even_polys(rng):
        g = EvenProfile.from_function(lambda p, c=coeffs: np.polyval(c[::-1], p ** 2), 1.0, 401)
        with warnings.catch_warnings():
            warnings.simplefilter("error", RuntimeWarning)
            back = abel_inverse(abel_forward(g, params), params)
        sel = g.points() >= 0.1
        scale = max(float(np.max(np.abs(g.values))), 1e-300)
        worst_rt = max(worst_rt, float(np.max(np.abs(back.values - g.values)[sel])) / scale)
    metrics["roundtrip_rel_err"] = worst_rt
    ok = worst_rt <= 1e-6

    # radialize(ridge) against the forward transform on a 3-D grid
    h = 0.05
    geom = GridField.centered(np.zeros((64, 64, 64)), h)
    e = np.array([1.0, 2.0, 2.0]) / 3.0
    X = geom.coords()
    proj = np.tensordot(e, X, axes=1)
    worst_ridge, bound_ok = 0.0, True
    for power, g2max in ((2, 2.0), (4, 12.0 * 1.5 ** 2)):
        ridge = geom.with_values(proj ** power)
        prof = radialize(ridge, 31, r_max=1.5, quad=sphere_quadrature(3, 32))
        fwd = abel_forward(lambda p, k=power: np.abs(p) ** k, params, r_max=1.5, count=31)
        err = float(np.max(np.abs(prof.values - fwd.values)))
        bound = 2 * h * h / 8 * g2max + 1e-10
        worst_ridge = max(worst_ridge, err / bound)
        bound_ok &= err <= bound
    metrics["ridge_err_over_bound"] = worst_ridge
    ok &= bound_ok

    consts = []
    spreads = []
    for s in (0.3, 0.5):
        g = EvenProfile.from_function(lambda p, s=s: np.exp(-p ** 2 / (2 * s * s)), 4.0, 801)
        rep = convolution_identity_check(g, params)
        consts.append(rep.constant)
        spreads.append(rep.spread)
    agree = abs(consts[0] - consts[1]) / abs(consts[1])
    metrics.update(identity_constants=consts, identity_spreads=spreads, constant_agreement=agree,
                   expected_constant=params.omega_ratio)
    ok &= max(spreads) <= 1e-3 and agree <= 1e-3

    step = 0.005
    errs = []
    for _ in range(20):
        a = float(rng.uniform(1.0, 1.5))
        b = a + float(rng.uniform(0.05, 0.4))
        pts = np.arange(0.9, 2.1 + step / 2, step)
        vals = smooth_bump(pts, a, b)
        rep = titchmarsh_forward_check(OffsetProfile(float(pts[0]), step, vals), 3, (a, b))
        errs.append(rep.error_steps)
    metrics["titchmarsh_max_error_steps"] = float(max(errs))
    ok &= max(errs) <= 2.0
    return CheckResult("abel", bool(ok), metrics,
                       config={"seed": seed, "n": 3, "roundtrip_tol": 1e-6, "identity_tol": 1e-3,
                               "titchmarsh_step": step, "titchmarsh_cases": 20})


def check_local(eps=0.2):
    cases = {
        "vanishing": (lambda r: np.zeros_like(r), "pass"),
        "bump_inside_reach": (lambda r: smooth_bump(r, 1.05, 1.1), "hypothesis_flagged"),
        "bump_beyond_reach": (lambda r: smooth_bump(r, 1.0 + eps + 0.05, 1.0 + eps + 0.45), "pass"),
    }
    metrics = {}
    witnesses = []
    ok = True
    for name, (func, expected) in cases.items():
        prof = RadialProfile.from_function(func, 2.0, 401)
        rep = local_theorem_pipeline(prof, eps)
        metrics[name] = {"status": rep.status, "expected": expected, "max_mean": rep.max_mean,
                         "max_g_inside": rep.max_g_inside}
        if rep.witness_center:
            witnesses.append({"kind": "nonzero_mean_center", "case": name, "point": list(rep.witness_center)})
        ok &= rep.status == expected
    return CheckResult("local_theorem", bool(ok), metrics, witnesses, config={"eps": eps, "n": 3})


# criterion 7 -------------------------------------------------------------

def hexagon_mask(shape, spacing, radius=0.9):
    g = ph.grid(2, shape, spacing)
    X, Y = g.coords()
    inside = np.ones(g.shape, bool)
    for k in range(6):
        a = math.pi / 3 * k
        inside &= X * math.cos(a) + Y * math.sin(a) <= radius * math.cos(math.pi / 6)
    from .geometry import DomainMask
    return DomainMask.like(g, inside)


def check_rconvex(seed=7):
    rng = np.random.default_rng(seed)
    agree = 0
    mismatches = []
    for i in range(25):
        K = ph.random_blob_mask((64, 64), rng)
        R = float(rng.uniform(2.0, 6.0))
        a = r_convex(K, R).status
        b = brute_force_r_convex(K, R)
        agree += a == b
        if a != b:
            mismatches.append({"kind": "oracle_mismatch", "mask": i, "R": R, "fast": a, "oracle": b})
    convex_ok = True
    sweep = (0.1, 0.25, 0.5, 1.0, 1.5)
    for name, K in (("disk", ph.disk_mask(2, 128, 0.02, 0.9)),
                    ("square", ph.square_mask(2, 128, 0.02, 0.8)),
                    ("hexagon", hexagon_mask(128, 0.02))):
        for R in sweep:
            v = r_convex(K, R)
            if not v.is_r_convex:
                convex_ok = False
                mismatches.append({"kind": "convex_rejected", "mask": name, "R": R, "status": v.status})
    two = ph.two_disk_mask(256, 0.02)
    v = r_convex(two, 1.0)
    in_gap = bool(v.witness_point and abs(v.witness_point[0]) <= 0.25 and abs(v.witness_point[1]) < 1.0)
    gap_ok = v.status == "coverage_fail_witness" and in_gap
    ok = agree == 25 and convex_ok and gap_ok
    witnesses = mismatches + [{"kind": "gap_uncovered", "point": list(v.witness_point)}]
    return CheckResult("rconvex", bool(ok),
                       {"oracle_agreement": agree, "convex_all_pass": convex_ok,
                        "two_disk_status": v.status, "witness_in_gap": in_gap},
                       witnesses, config={"seed": seed, "random_masks": 25, "shape": [64, 64],
                                          "convex_R_sweep": list(sweep)})


# criterion 8 -------------------------------------------------------------

def check_support(seed=7):
    rng = np.random.default_rng(seed)
    N, h, R = 256, 0.02, 0.7
    K = ph.disk_mask(2, N, h, 1.0)
    cfg = HarnessConfig(K, R)
    inner = ph.radial_bump(2, N, h, 0.9)
    rep_in = support_theorem_harness(inner, cfg)
    ok_in = rep_in.status == "consistent-pass" and rep_in.hypothesis_max <= 1e-3 and \
        rep_in.exterior_mass_fraction <= 1e-3
    angle = float(rng.uniform(0, 2 * math.pi))
    bump_c = np.array([1.6 * math.cos(angle), 1.6 * math.sin(angle)])
    bump_r = 0.15
    outer = ph.add(inner, ph.radial_bump(2, N, h, bump_r, bump_c))
    rep_out = support_theorem_harness(outer, cfg)
    dist = float(np.linalg.norm(np.asarray(rep_out.witness_point) - bump_c)) if rep_out.witness_point else math.inf
    ok_out = rep_out.status == "hypothesis-violated" and dist <= bump_r + 2 * h

    kernel = SphereKernel(0.7, 2)
    rt = {}
    ok_rt = True
    for name, f in (("gaussian_s1", ph.gaussian(2, 256, 0.1, sigma=1.0)),
                    ("offset_gaussian", ph.gaussian(2, 256, 0.1, sigma=1.2, center=(1.0, -2.0)))):
        mass = ring_mass_fraction(f, kernel)
        res = deconvolve(fixed_radius_transform(f, kernel), kernel)
        err = float(np.linalg.norm(res.field.values - f.values) / np.linalg.norm(f.values))
        rt[name] = {"ring_mass": mass, "rel_l2_err": err, "discarded_fraction": res.discarded_fraction}
        ok_rt &= mass <= 1e-3 and err <= 5e-2
    ok = ok_in and ok_out and ok_rt
    return CheckResult(
        "support", bool(ok),
        {"inside": {"status": rep_in.status, "hypothesis_max": rep_in.hypothesis_max,
                    "exterior_mass": rep_in.exterior_mass_fraction, "regime": rep_in.regime},
         "exterior_bump": {"status": rep_out.status, "hypothesis_max": rep_out.hypothesis_max,
                           "witness_distance": dist, "regime": rep_out.regime},
         "roundtrip": rt},
        [{"kind": "hypothesis_witness", "center": list(rep_out.witness_center),
          "point": list(rep_out.witness_point), "bump_center": bump_c.tolist()}],
        config={"seed": seed, "shape": [N, N], "spacing": h, "R": R, "K": "disk r=1",
                "roundtrip": {"shape": [256, 256], "spacing": 0.1, "R": 0.7}})


# criterion 9 -------------------------------------------------------------

def check_rconvex_walk(seed=7):
    rng = np.random.default_rng(seed)
    N, h, R = 256, 0.02, 0.4
    L = ph.lshape_mask(N, h, 1.0, 0.6)
    verdict = r_convex(L, R)
    cfg = HarnessConfig(L, R)
    good = ph.masked_bumps(L, 4, rng)
    w_good = rconvex_region_growing(good, cfg)
    pocket_c = np.array([0.25, 0.25])
    pocket_r = 0.08
    bad = ph.add(good, ph.radial_bump(2, N, h, pocket_r, pocket_c))
    w_bad = rconvex_region_growing(bad, cfg)
    dist = (float(np.linalg.norm(np.asarray(w_bad.blocking_point) - pocket_c))
            if w_bad.blocking_point else math.inf)
    ok = verdict.is_r_convex and w_good.complete and not w_bad.complete and dist <= pocket_r + 2 * h
    return CheckResult(
        "rconvex_walk", bool(ok),
        {"mask_status": verdict.status, "compliant_complete": w_good.complete,
         "compliant_reached": w_good.reached_count, "centers": w_good.center_count,
         "pocket_complete": w_bad.complete, "pocket_frontier": w_bad.frontier_count,
         "blocking_distance": dist},
        [{"kind": "frontier", "point": list(p)} for p in w_bad.frontier_witnesses[:3]]
        + [{"kind": "blocking_point", "point": list(w_bad.blocking_point)}],
        config={"seed": seed, "shape": [N, N], "spacing": h, "R": R, "fillet": 0.6})


SUITES = {
    "specfun": lambda seed: [check_special_functions(), check_specfun_invariants()],
    "transform": lambda seed: [check_multiplier_equivalence(), check_representation(), check_zero_rings()],
    "zalcman": lambda seed: [check_zalcman(seed)],
    "abel": lambda seed: [check_abel(seed)],
    "local": lambda seed: [check_local()],
    "rconvex": lambda seed: [check_rconvex(seed)],
    "support": lambda seed: [check_support(seed)],
    "rconvex-walk": lambda seed: [check_rconvex_walk(seed)],
}


def run_suite(name, seed=7):
    if name == "all":
        checks = [c for key in SUITES for c in SUITES[key](seed)]
    else:
        checks = SUITES[name](seed)
    return SuiteResult(name, checks, {"seed": seed})
