"""Deconvolution, the Zalcman family and the support-theorem harnesses."""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.fft
from scipy import ndimage
from scipy.special import gammaln

from .field import GridField, OutOfDomainError, default_quadrature, fft_workers, frequency_magnitude
from .geometry import BallElement, DomainMask, center_set, erode, r_convex
from .specfun import bessel_zeros, normalized_j
from .transform import SphereKernel, interior_mask, quadrature_transform, radial_eval

DISCARD_WARNING_FRACTION = 0.5


@dataclass(frozen=True)
class RegularizationPolicy:
    """How to treat frequencies near the zero rings of the multiplier.

    ``ring_half_width`` is in ``|xi|`` units; ``None`` means three spectral
    bins of the padded grid.
    """

    strategy: str = "zero_fill"
    ring_half_width: float | None = None
    epsilon: float | None = None

    def __post_init__(self):
        if self.strategy not in ("zero_fill", "tikhonov"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.ring_half_width is not None and not self.ring_half_width > 0:
            raise ValueError("ring_half_width must be positive")
        if self.strategy == "tikhonov" and not (self.epsilon is not None and self.epsilon > 0):
            raise ValueError("tikhonov needs a positive epsilon")

    @classmethod
    def parse(cls, text):
        """``"zero"`` or ``"tikhonov:EPS"``."""
        if text == "zero":
            return cls("zero_fill")
        if text.startswith("tikhonov:"):
            return cls("tikhonov", epsilon=float(text.split(":", 1)[1]))
        raise ValueError(f"policy must be 'zero' or 'tikhonov:EPS', got {text!r}")


def ring_mask(kmag, kernel, half_width):
    """Bins within ``half_width`` of any zero ring ``z_k / R``."""
    kmax = float(np.max(kmag)) + half_width
    # z_k < pi (k + 1) for the orders used, so this count covers every ring below kmax
    count = int(kmax * kernel.R / math.pi) + 2
    rings = kernel.zero_rings(count)
    rings = rings[rings <= kmax]
    hit = radial_eval(lambda k: np.min(np.abs(k[:, None] - rings[None, :]), axis=1) <= half_width
                      if rings.size else np.zeros(k.shape, bool), kmag)
    return hit.astype(bool)


@dataclass(frozen=True)
class DeconvolutionResult:
    field: GridField
    discarded_fraction: float
    warning: str | None
    ring_half_width: float
    strategy: str


def deconvolve(h, kernel, policy=None, pad=None):
    """Estimate ``f`` from ``h = f * delta_R`` by dividing out ``j_p(R|xi|)``.

    ``h`` is zero-padded by ``ceil(R/h) + 1`` layers.  Bins within the ring
    half width of a zero ring are zero-filled or Tikhonov-damped
    (``h_hat j / (j^2 + eps)``).  ``discarded_fraction`` is the spectral
    energy of ``h`` on those bins over the total.
    """
    policy = RegularizationPolicy() if policy is None else policy
    if kernel.dim != h.dim:
        raise ValueError("kernel and field dimensions differ")
    pad = int(math.ceil(kernel.R / h.spacing)) + 1 if pad is None else int(pad)
    hp = np.pad(h.values, pad)
    spec = scipy.fft.fftn(hp, workers=fft_workers())
    kmag = frequency_magnitude(hp.shape, h.spacing)
    width = (3 * 2 * math.pi / (min(hp.shape) * h.spacing)
             if policy.ring_half_width is None else policy.ring_half_width)
    mult = kernel.multiplier(kmag)
    on_ring = ring_mask(kmag, kernel, width)
    power = np.abs(spec) ** 2
    total = float(power.sum())
    discarded = float(power[on_ring].sum()) / total if total > 0 else 0.0
    out = np.zeros_like(spec)
    off = ~on_ring
    out[off] = spec[off] / mult[off]
    if policy.strategy == "tikhonov":
        j = mult[on_ring]
        out[on_ring] = spec[on_ring] * j / (j * j + policy.epsilon)
    est = scipy.fft.ifftn(out, workers=fft_workers()).real
    core = tuple(slice(pad, pad + n) for n in h.shape)
    warning = None
    if discarded > DISCARD_WARNING_FRACTION:
        warning = f"{discarded:.3f} of the spectral energy lies on zero rings; h is dominated by invisible components"
    return DeconvolutionResult(h.with_values(est[core]), discarded, warning, width, policy.strategy)


def ring_mass_fraction(field, kernel, half_width=None, pad=None):
    """Share of the spectral energy of ``field`` within ``half_width`` of a zero ring."""
    pad = int(math.ceil(kernel.R / field.spacing)) + 1 if pad is None else int(pad)
    fp = np.pad(field.values, pad)
    spec = scipy.fft.fftn(fp, workers=fft_workers())
    kmag = frequency_magnitude(fp.shape, field.spacing)
    width = 3 * 2 * math.pi / (min(fp.shape) * field.spacing) if half_width is None else half_width
    power = np.abs(spec) ** 2
    return float(power[ring_mask(kmag, kernel, width)].sum() / power.sum())


@dataclass(frozen=True)
class CounterexampleSpec:
    """``f(x) = |x|^{1-n/2} J_{n/2-1}(lam |x|)`` with ``J_{n/2-1}(lam) = 0``."""

    dim: int
    lam: float
    sphere_radius: float = 1.0
    tol: float = 1e-9

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if self.sphere_radius != 1.0:
            raise ValueError("the counterexample is scaled to unit spheres")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        count = int(self.lam / math.pi) + 3
        zeros = bessel_zeros(self.order, count).as_array()
        if np.min(np.abs(zeros - self.lam)) > self.tol:
            raise ValueError(f"lam = {self.lam} is not a zero of J_{self.order}")

    @classmethod
    def from_zero_index(cls, dim, index=0):
        return cls(dim, bessel_zeros(dim / 2.0 - 1.0, index + 1)[index])

    @property
    def order(self):
        return self.dim / 2.0 - 1.0

    @property
    def critical_p(self):
        return 2.0 * self.dim / (self.dim - 1.0)

    @property
    def product_constant(self):
        """``c`` with ``M f(x, t) = c f(x) f(t)``, namely ``2^p Gamma(p+1) / lam^p``."""
        p = self.order
        return math.exp(p * math.log(2.0) + gammaln(p + 1) - p * math.log(self.lam))

    def profile(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        return radial_eval(lambda x: normalized_j(self.order, self.lam * x), r) / self.product_constant


def zalcman_field(spec, shape, spacing):
    """Sample the counterexample on a centered grid; the origin uses the series limit."""
    geom = GridField.centered(np.zeros(shape), spacing)
    if len(shape) != spec.dim:
        raise ValueError("grid dimension does not match the counterexample")
    return geom.with_values(spec.profile(geom.radius()))


@dataclass(frozen=True)
class ProductIdentityReport:
    constant: float
    analytic_constant: float
    max_rel_error: float
    per_center: tuple


def zalcman_product_check(field, spec, centers, ts, quad=None):
    """Compare ``M f(x, t)`` with ``c f(x) f(t)``; ``c`` fitted at ``x = 0``."""
    from .transform import spherical_means

    ts = np.asarray(ts, dtype=float)
    ft = spec.profile(ts)
    origin = np.zeros((1, field.dim))

    def means_at(x):
        return np.array([spherical_means(field, x, t, quad)[0] for t in ts])

    m0 = means_at(origin)
    f0 = float(spec.profile(0.0))
    pred0 = f0 * ft
    c = float(np.dot(m0, pred0) / np.dot(pred0, pred0))
    errs = []
    for x in np.atleast_2d(centers):
        m = means_at(x[None, :])
        pred = c * float(spec.profile(np.linalg.norm(x))) * ft
        errs.append(float(np.max(np.abs(m - pred)) / np.max(np.abs(pred))))
    return ProductIdentityReport(c, spec.product_constant, max(errs), tuple(errs))


def lp_annulus_tails(field, p, t0_list):
    """``(int_{t0 <= |x| <= 2 t0} |f|^p dx)^{1/p}`` for each ``t0`` (Riemann sum)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    r = field.radius()
    limit = field.inscribed_radius()
    out = []
    for t0 in t0_list:
        if 2 * t0 > limit + 1e-12:
            raise OutOfDomainError(f"annulus [{t0}, {2 * t0}] exits the grid (inscribed radius {limit})")
        sel = (r >= t0) & (r <= 2 * t0)
        out.append(float((np.sum(np.abs(field.values[sel]) ** p) * field.spacing ** field.dim) ** (1.0 / p)))
    return np.array(out)


@dataclass(frozen=True)
class HarnessConfig:
    K: DomainMask
    R: float
    mean_tol: float = 1e-3
    support_tol: float = 1e-3
    quad: object = None

    def __post_init__(self):
        if not (self.mean_tol > 0 and self.support_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.R > 0:
            raise ValueError("R must be positive")

    def check_geometry(self, f):
        if self.K.shape != f.shape or abs(self.K.spacing - f.spacing) > 1e-12 * f.spacing or \
                np.max(np.abs(np.subtract(self.K.origin, f.origin))) > 1e-9 * f.spacing:
            raise ValueError("mask lattice does not match the field")
        if not self.K.values.any():
            raise ValueError("K is empty")
        if not self.K.is_bounded():
            raise ValueError("K is unbounded on this grid")
        if self.K.values.all():
            raise ValueError("K covers the whole grid")


@dataclass(frozen=True)
class SupportReport:
    status: str
    regime: str
    hypothesis_max: float
    exterior_mass_fraction: float
    center_count: int
    witness_center: tuple
    witness_point: tuple
    tails: dict = dc_field(default_factory=dict)
    implementation_failure: bool = False


def _sphere_means_all(f, R, quad):
    return quadrature_transform(f, SphereKernel(R, f.dim), quad).values


def support_theorem_harness(f, cfg, tail_ps=(3.5, 5.0)):
    """Check the hypothesis (means vanish at every admissible center) and the
    conclusion (no L1 mass outside ``K``) on a sampled field.

    Admissible centers are lattice points of ``center_set(K, R)`` whose
    sphere stays inside the grid.  Statuses: ``consistent-pass``,
    ``hypothesis-violated`` and ``conclusion-violated``.  The regime is
    ``compact`` when ``f`` is below ``support_tol * max|f|`` on the outer
    band of width ``R``, else ``non-compact`` (tails attached).  A conclusion
    violation with the hypothesis satisfied in the compact regime sets
    ``implementation_failure``.
    """
    cfg.check_geometry(f)
    quad = default_quadrature(f.dim, cfg.R, f.spacing) if cfg.quad is None else cfg.quad
    fmax = float(np.max(np.abs(f.values)))
    C = center_set(cfg.K, cfg.R).values & interior_mask(f, cfg.R)
    n_centers = int(C.sum())
    if fmax == 0.0:
        return SupportReport("consistent-pass", "compact", 0.0, 0.0, n_centers, (), ())
    means = _sphere_means_all(f, cfg.R, quad)
    vals = np.where(C, np.abs(means), -1.0)
    hyp = float(vals.max()) / fmax if n_centers else 0.0
    absf = np.abs(f.values)
    exterior = float(absf[~cfg.K.values].sum() / absf.sum())
    band = f.edge_distance() < cfg.R
    compact = float(absf[band].max()) <= cfg.support_tol * fmax
    regime = "compact" if compact else "non-compact"
    tails = {}
    if not compact:
        limit = f.inscribed_radius()
        t0s = [t for t in (1.0, 1.5, 2.0, 2.5) if 2 * t <= limit]
        if t0s:
            for p in tail_ps:
                tails[f"p={p:g}"] = [float(v) for v in lp_annulus_tails(f, p, t0s)]
            tails["t0"] = t0s
    widx, wpt = (), ()
    if hyp > cfg.mean_tol:
        idx = np.unravel_index(int(np.argmax(vals)), vals.shape)
        widx = tuple(float(v) for v in f.point_of(idx))
        wpt = _max_on_sphere(f, np.asarray(widx), cfg.R, quad)
        status = "hypothesis-violated"
    elif exterior > cfg.support_tol:
        status = "conclusion-violated"
    else:
        status = "consistent-pass"
    failure = status == "conclusion-violated" and regime == "compact"
    return SupportReport(status, regime, hyp, exterior, n_centers, widx, wpt, tails, failure)


def _max_on_sphere(f, center, R, quad):
    from .field import sample

    pts = center[None, :] + R * quad.directions
    vals = np.abs(sample(f, pts, outside="zero"))
    return tuple(float(v) for v in pts[int(np.argmax(vals))])


class NotRConvexError(ValueError):
    def __init__(self, verdict):
        super().__init__(f"K is not R-convex: {verdict.status}")
        self.verdict = verdict


@dataclass(frozen=True)
class WalkReport:
    complete: bool
    center_count: int
    reached_count: int
    seed_count: int
    frontier_count: int
    frontier_witnesses: tuple
    blocking_point: tuple
    blocking_value: float


def rconvex_region_growing(f, cfg, max_witnesses=8):
    """Grow the set of centers whose R-ball sees ``f ~ 0`` from the far field.

    ``C_f`` is the union of face-connected components of
    ``C & {ball vanishes}`` that contain a seed, where seeds are centers in
    the outer two-voxel layer of the grid.  When no center of ``C`` outside
    ``C_f`` touches ``C_f`` the set is open and closed in ``C``, so for a
    connected ``C`` it is all of ``C``.  Otherwise the blocked neighbours are
    reported, with the largest ``|f|`` in the first blocked ball.
    """
    cfg.check_geometry(f)
    verdict = r_convex(cfg.K, cfg.R)
    if not verdict.is_r_convex:
        raise NotRConvexError(verdict)
    fmax = float(np.max(np.abs(f.values)))
    C = center_set(cfg.K, cfg.R).values
    ball = BallElement.from_radius(cfg.R, f.spacing)
    if fmax == 0.0:
        n = int(C.sum())
        return WalkReport(True, n, n, n, 0, (), (), 0.0)
    vanish = np.abs(f.values) <= cfg.support_tol * fmax
    quiet = erode(DomainMask(vanish, f.spacing, f.origin), ball).values
    good = C & quiet
    outer = np.zeros(f.shape, bool)
    for axis in range(f.dim):
        sl = [slice(None)] * f.dim
        sl[axis] = slice(0, 2)
        outer[tuple(sl)] = True
        sl[axis] = slice(-2, None)
        outer[tuple(sl)] = True
    seeds = good & outer
    labels, _ = ndimage.label(good)
    keep = np.unique(labels[seeds])
    keep = keep[keep > 0]
    reached = np.isin(labels, keep)
    grown = ndimage.binary_dilation(reached)  # face neighbours
    blocked = grown & C & ~reached
    n_blocked = int(blocked.sum())
    witnesses = tuple(tuple(float(v) for v in f.point_of(idx)) for idx in np.argwhere(blocked)[:max_witnesses])
    bpt, bval = (), 0.0
    if n_blocked:
        first = np.argwhere(blocked)[0]
        m = int(math.floor(ball.radius_voxels + 1e-9))
        lo = np.maximum(first - m, 0)
        hi = np.minimum(first + m + 1, f.shape)
        win = tuple(slice(a, b) for a, b in zip(lo, hi))
        sub = np.abs(f.values[win])
        offs = np.stack(np.meshgrid(*[np.arange(a, b) - c for a, b, c in zip(lo, hi, first)], indexing="ij"))
        inside = np.sum(offs ** 2, axis=0) <= (ball.radius_voxels + 1e-9) ** 2
        sub = np.where(inside, sub, -1.0)
        loc = np.unravel_index(int(np.argmax(sub)), sub.shape)
        bidx = tuple(int(a + b) for a, b in zip(lo, loc))
        bpt = tuple(float(v) for v in f.point_of(bidx))
        bval = float(np.abs(f.values[bidx]) / fmax)
    complete = bool(n_blocked == 0 and np.array_equal(reached, C))
    return WalkReport(complete, int(C.sum()), int(reached.sum()), int(seeds.sum()), n_blocked,
                      witnesses, bpt, bval)
