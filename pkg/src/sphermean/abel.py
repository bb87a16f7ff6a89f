"""Abel-type transforms linking ridge profiles and radial profiles.

For an even profile ``g`` and a unit direction ``e`` in ``R^n``, the angular
average of the ridge function ``g(<x, e>)`` is the radial function

    f(r) = 2 (w_{n-1}/w_n) r^{2-n} int_0^r (r^2 - p^2)^a g(p) dp,   a = (n-3)/2,

with ``w_n`` the surface area of the unit sphere in ``R^n`` (``w_1 = 2``,
``w_2 = 2 pi``, ``w_3 = 4 pi``).  The inverse is

    g(p) = 2^{n-1} p / (n-2)!  (d/du)^{n-1} F(u),   u = p^2,
    F(u) = int_0^p r^{n-1} (p^2 - r^2)^a f(r) dr.

Averaging the ridge over unit spheres gives a 1-D convolution of ``g`` with
``(1 - t^2)_+^a``; the proportionality constant is ``w_{n-1}/w_n``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import roots_jacobi

from .field import RadialProfile, sphere_quadrature
from .transform import SPHERE_AREA, spherical_mean

STENCIL_POINTS = 9
CONDITIONING_TOL = 1e-3


class UnsupportedConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class EvenProfile:
    """Even function sampled on ``p_i = i * p_max / (count - 1)``; zero beyond ``p_max``."""

    p_max: float
    values: np.ndarray
    warnings: tuple = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 32:
            raise ValueError("an even profile needs at least 32 samples")
        if not np.all(np.isfinite(values)):
            raise ValueError("profile values must be finite")
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "p_max", float(self.p_max))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @classmethod
    def from_function(cls, func, p_max, count=401):
        return cls(p_max, func(np.linspace(0.0, p_max, count)))

    @property
    def count(self):
        return self.values.size

    @property
    def step(self):
        return self.p_max / (self.count - 1)

    def points(self):
        return np.linspace(0.0, self.p_max, self.count)

    def _spline(self):
        p = self.points()
        return CubicSpline(np.concatenate([-p[:0:-1], p]),
                           np.concatenate([self.values[:0:-1], self.values]))

    def __call__(self, p):
        p = np.abs(np.asarray(p, dtype=float))
        inside = p <= self.p_max * (1 + 1e-12)
        return np.where(inside, self._spline()(np.minimum(p, self.p_max)), 0.0)


@dataclass(frozen=True)
class AbelParams:
    """Dimension of the ambient space; ``dim=2`` needs the endpoint-weighted rule."""

    dim: int = 3
    singular_quadrature: bool = False

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if self.dim == 2 and not self.singular_quadrature:
            raise UnsupportedConfigurationError(
                "dim=2 has an endpoint singularity; pass singular_quadrature=True")

    @property
    def exponent(self):
        return (self.dim - 3) / 2.0

    @property
    def omega_ratio(self):
        return SPHERE_AREA[self.dim - 1] / SPHERE_AREA[self.dim]


@lru_cache(maxsize=64)
def _gauss_jacobi(count, alpha, beta):
    x, w = roots_jacobi(count, alpha, beta)
    return x, w


def _forward_values(g, params, r, nodes):
    # int_0^1 (1-s^2)^a g(rs) ds = 1/2 int_{-1}^{1} (1-s^2)^a g(rs) ds for even g
    a = params.exponent
    s, w = _gauss_jacobi(nodes, a, a)
    vals = g(np.asarray(r)[:, None] * s[None, :]) @ w
    return 2.0 * params.omega_ratio * 0.5 * vals


def abel_forward(g, params=None, r_max=None, count=None, nodes=256):
    """Radial profile of the angular average of the ridge ``g(<x, e>)``.

    ``g`` is an :class:`EvenProfile` or an even callable.  The radial grid
    defaults to that of ``g``.
    """
    params = AbelParams() if params is None else params
    if isinstance(g, EvenProfile):
        r_max = g.p_max if r_max is None else r_max
        count = g.count if count is None else count
    elif r_max is None or count is None:
        raise ValueError("r_max and count are required for callable profiles")
    r = np.linspace(0.0, r_max, count)
    return RadialProfile(r_max, _forward_values(g, params, r, nodes))


def _fd_weights(offsets, order):
    """Weights ``c`` with ``sum c_j F(x + o_j) ~ F^(order)(x)`` for unit spacing."""
    k = len(offsets)
    V = np.vander(np.asarray(offsets, dtype=float), k, increasing=True).T
    rhs = np.zeros(k)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def _smooth_factor(f, params, u, nodes):
    """``G(u) = int_0^1 s^{n-1} (1-s^2)^a f(sqrt(u) s) ds``, so ``F(u) = u^{n-3/2} G(u)``."""
    n = params.dim
    a = params.exponent
    # weight (1-s)^a s^{n-1} on [0,1] via Jacobi on [-1,1]; (1+s)^a stays in the integrand
    x, w = _gauss_jacobi(nodes, a, n - 1.0)
    s = 0.5 * (x + 1.0)
    w = w * 0.5 ** (a + n)
    p = np.sqrt(np.maximum(u, 0.0))
    vals = f(p[:, None] * s[None, :]) * (1.0 + s[None, :]) ** a
    return vals @ w


def _u_derivatives(f, params, u_targets, du, u_max, nodes):
    """``G^(k)(u)`` for ``k = 0..n-1`` by 9-point stencils kept inside ``[0, u_max]``."""
    top = params.dim - 1
    k = STENCIL_POINTS
    half = (k - 1) / 2.0
    span = (k - 1) * du
    if span > u_max:
        raise ValueError("derivative step too large for the profile range")
    start = np.clip(u_targets - half * du, 0.0, u_max - span)
    pts = start[:, None] + du * np.arange(k)[None, :]
    vals = _smooth_factor(f, params, pts.ravel(), nodes).reshape(pts.shape)
    out = np.empty((top + 1, len(u_targets)))
    for i, (u, row) in enumerate(zip(u_targets, pts)):
        for order in range(top + 1):
            out[order, i] = _fd_weights((row - u) / du, order) @ vals[i] / du ** order
    return out


def _falling(beta, k):
    out = 1.0
    for j in range(k):
        out *= beta - j
    return out


def _assemble(derivs, u, n):
    # p (d/du)^{n-1} [u^beta G] with beta = n - 3/2; every term is u^{n-1-k} G^{(n-1-k)}
    beta = n - 1.5
    m = n - 1
    total = np.zeros_like(u)
    for k in range(m + 1):
        total += math.comb(m, k) * _falling(beta, k) * u ** (m - k) * derivs[m - k]
    return total


def abel_inverse(f, params=None, du=None, nodes=None):
    """Ridge profile ``g`` with ``abel_forward(g) = f``.

    ``F(u) = u^{n-3/2} G(u)`` with ``G`` smooth in ``u``; the product rule
    moves the algebraic factor out so only ``G`` is differentiated, with
    9-point stencils of step ``du`` (default ``p_max^2 / 200``; the inner
    rule uses ``max(256, 2 count)`` nodes), one-sided
    near the ends of ``[0, p_max^2]``.  A second pass at ``2 du`` measures
    conditioning; a disagreement above ``1e-3`` of ``max|g|`` is recorded in
    ``warnings`` and emitted as a ``RuntimeWarning``.
    """
    params = AbelParams() if params is None else params
    if not isinstance(f, RadialProfile):
        raise TypeError("abel_inverse expects a RadialProfile")
    p_max, count = f.r_max, f.count
    spline = f.spline()
    u_max = p_max ** 2
    du = u_max / 200.0 if du is None else float(du)
    nodes = max(256, 2 * count) if nodes is None else int(nodes)
    n = params.dim
    p = np.linspace(0.0, p_max, count)
    u = p ** 2
    scale = 2.0 ** (n - 1) / math.factorial(n - 2)
    g1 = scale * _assemble(_u_derivatives(spline, params, u, du, u_max, nodes), u, n)
    g2 = scale * _assemble(_u_derivatives(spline, params, u, 2 * du, u_max, nodes), u, n)
    msgs = []
    ref = max(float(np.max(np.abs(g1))), 1e-300)
    spread = float(np.max(np.abs(g1 - g2))) / ref
    if spread > CONDITIONING_TOL:
        msg = f"finite-difference stencils disagree by {spread:.3g} relative; input may be too rough"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        msgs.append(msg)
    return EvenProfile(p_max, g1, tuple(msgs))


def ridge_convolution_kernel(n, count=201):
    """``(1 - p^2)_+^{(n-3)/2}`` sampled on ``[0, 1]``.

    For ``n = 2`` the endpoint sample is replaced by the average of the
    kernel over the last half cell, which keeps the table finite; the
    convolution itself uses the exact endpoint weight.
    """
    if n not in (2, 3):
        raise ValueError("n must be 2 or 3")
    a = (n - 3) / 2.0
    p = np.linspace(0.0, 1.0, count)
    if n == 3:
        return EvenProfile(1.0, np.ones(count))
    vals = np.empty(count)
    vals[:-1] = (1 - p[:-1] ** 2) ** a
    hstep = 0.5 * p[1]
    # int_{1-h}^{1} (1-p^2)^{-1/2} dp = pi/2 - asin(1-h)
    vals[-1] = (math.pi / 2 - math.asin(1 - hstep)) / hstep
    return EvenProfile(1.0, vals)


def ridge_convolve(g, n, nodes=512, count=None):
    """``(g *_1 k)(s) = int g(s - t) (1 - t^2)_+^{(n-3)/2} dt`` on ``[0, p_max + 1]``."""
    a = (n - 3) / 2.0
    t, w = _gauss_jacobi(nodes, a, a)
    count = g.count + int(round(1.0 / g.step)) if count is None else count
    s = np.linspace(0.0, g.p_max + 1.0, count)
    vals = g(s[:, None] - t[None, :]) @ w
    return EvenProfile(g.p_max + 1.0, vals)


@dataclass(frozen=True)
class ConvolutionIdentityReport:
    radii: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    ratio: np.ndarray
    constant: float
    spread: float
    excluded: tuple
    expected_constant: float


def convolution_identity_check(g, params=None, sample_points=None, quad=None, rhs_floor=1e-8):
    """Compare unit-sphere means of the radial field ``abel_forward(g)`` with
    ``abel_forward(g *_1 k)`` at the given radii.

    Returns pointwise ratios, the least-squares common constant and the
    relative spread ``max|ratio - c| / |c|``.  Points where ``|RHS|`` is below
    ``rhs_floor`` times its maximum are excluded and listed.
    """
    params = AbelParams() if params is None else params
    n = params.dim
    radii = np.linspace(0.2, 2.0, 19) if sample_points is None else np.asarray(sample_points, float)
    reach = float(np.max(radii)) + 1.0
    count = int(math.ceil(reach / g.step)) + 1
    F = abel_forward(g, params, r_max=reach, count=count)
    spline = F.spline()
    quad = sphere_quadrature(n, 512 if n == 2 else 256) if quad is None else quad

    def radial_field(pts):
        return spline(np.linalg.norm(pts, axis=-1))

    axis = np.zeros(n)
    axis[-1] = 1.0
    lhs = np.array([spherical_mean(radial_field, r * axis, 1.0, quad) for r in radii])
    conv = ridge_convolve(g, n)
    rhs = _forward_values(conv, params, radii, 512)
    if np.max(np.abs(rhs)) == 0.0:
        return ConvolutionIdentityReport(radii, lhs, rhs, np.full(radii.shape, np.nan), math.nan,
                                         0.0 if np.max(np.abs(lhs)) == 0 else math.inf,
                                         tuple(range(len(radii))), params.omega_ratio)
    keep = np.abs(rhs) > rhs_floor * np.max(np.abs(rhs))
    ratio = np.where(keep, lhs / np.where(keep, rhs, 1.0), np.nan)
    c = float(np.dot(lhs[keep], rhs[keep]) / np.dot(rhs[keep], rhs[keep]))
    spread = float(np.max(np.abs(ratio[keep] - c)) / abs(c))
    excluded = tuple(int(i) for i in np.flatnonzero(~keep))
    return ConvolutionIdentityReport(radii, lhs, rhs, ratio, c, spread, excluded, params.omega_ratio)


@dataclass(frozen=True)
class OffsetProfile:
    """One-sided profile sampled on ``p_i = p_start + i * step``, zero outside, piecewise linear."""

    p_start: float
    step: float
    values: np.ndarray

    def points(self):
        return self.p_start + self.step * np.arange(len(self.values))

    def __call__(self, p):
        return np.interp(p, self.points(), self.values, left=0.0, right=0.0)


def smooth_bump(x, a, b):
    """C-infinity bump supported on ``[a, b]`` with peak 1 at the midpoint."""
    x = np.asarray(x, dtype=float)
    c = 0.5 * (a + b)
    hw = 0.5 * (b - a)
    z = (x - c) / hw
    inside = np.abs(z) < 1
    out = np.zeros_like(x)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - z[inside] ** 2))
    return out


@dataclass(frozen=True)
class TitchmarshReport:
    onset: float
    expected: float
    step: float
    error_steps: float
    within_tolerance: bool
    degenerate: bool


def titchmarsh_forward_check(g, n, support, s_grid=None, threshold=1e-10, nodes=2048):
    """Locate the first ``s`` where ``k = g *_1 (1 - t^2)_+^a`` leaves zero.

    ``g`` is an :class:`OffsetProfile` declared to live on ``support = (a, b)``.
    The expected onset is ``a - 1``; ``threshold`` is relative to ``max|k|``.
    For ``n = 3`` the kernel is an indicator and ``k(s) = G(s+1) - G(s-1)``
    with ``G`` the exact antiderivative of the linear interpolant.
    """
    lo, hi = support
    pts = g.points()
    outside = (pts < lo - 1e-12) | (pts > hi + 1e-12)
    if np.any(g.values[outside] != 0):
        raise ValueError("profile has samples outside its declared support")
    step = g.step
    if s_grid is None:
        s_grid = np.arange(lo - 1.5, hi + 1.5 + step / 2, step)
    s_grid = np.asarray(s_grid, dtype=float)
    if n == 3:
        seg = 0.5 * (g.values[1:] + g.values[:-1]) * step
        cum = np.concatenate([[0.0], np.cumsum(seg)])

        def G(x):
            x = np.clip(x, pts[0], pts[-1])
            i = np.clip(((x - pts[0]) // step).astype(int), 0, len(pts) - 2)
            dx = x - pts[i]
            slope = (g.values[i + 1] - g.values[i]) / step
            return cum[i] + g.values[i] * dx + 0.5 * slope * dx ** 2

        k = G(s_grid + 1.0) - G(s_grid - 1.0)
    elif n == 2:
        t, w = _gauss_jacobi(nodes, -0.5, -0.5)
        k = g(s_grid[:, None] + t[None, :]) @ w
    else:
        raise ValueError("n must be 2 or 3")
    kmax = float(np.max(np.abs(k)))
    expected = lo - 1.0
    if kmax == 0.0:
        return TitchmarshReport(math.nan, expected, step, math.nan, False, True)
    onset = float(s_grid[np.argmax(np.abs(k) > threshold * kmax)])
    err = abs(onset - expected) / step
    return TitchmarshReport(onset, expected, step, err, err <= 2.0, False)


@dataclass(frozen=True)
class LocalTheoremReport:
    status: str
    max_mean: float
    witness_center: tuple
    vanishing_radius: float
    max_f_inside: float
    max_g_inside: float
    max_reconstructed_inside: float
    notes: tuple = dc_field(default=())


def local_theorem_pipeline(f, eps, n=3, tol=1e-8, delta=None, centers=9, quad=None):
    """Forward check of local support propagation for a radial profile ``f``.

    ``f`` must vanish on ``[0, 1]``.  Unit-sphere means are taken at
    ``centers`` points ``rho * e`` with ``rho`` in ``[0, eps)`` along the
    quadrature's polar axis.  If they all stay below ``tol * max|f|`` the
    profile ``g = abel_inverse(f)`` and its forward image are checked to
    vanish on ``[0, 1 + eps - delta]``.

    Statuses: ``pass`` (hypothesis and conclusion hold), ``hypothesis_flagged``
    (some mean is nonzero; the witness center is reported) and
    ``counterexample`` (means vanish yet ``f`` does not).
    """
    params = AbelParams(n, singular_quadrature=(n == 2))
    r = f.radii()
    fmax = float(np.max(np.abs(f.values)))
    if fmax == 0.0:
        return LocalTheoremReport("pass", 0.0, (), 1.0 + eps, 0.0, 0.0, 0.0, ("f is identically zero",))
    if np.max(np.abs(f.values[r <= 1.0])) > tol * fmax:
        raise ValueError("f must vanish on [0, 1]")
    if f.r_max < 1.0 + eps:
        raise ValueError("profile must extend past 1 + eps")
    delta = 2 * f.step if delta is None else delta
    quad = sphere_quadrature(n, 1024 if n == 2 else 512) if quad is None else quad
    spline = f.spline()
    r_max = f.r_max

    def field(pts):
        rr = np.linalg.norm(pts, axis=-1)
        return np.where(rr <= r_max, spline(np.minimum(rr, r_max)), 0.0)

    axis = np.zeros(n)
    axis[-1] = 1.0
    rhos = eps * np.arange(centers) / centers
    means = np.array([spherical_mean(field, rho * axis, 1.0, quad) for rho in rhos])
    worst = int(np.argmax(np.abs(means)))
    max_mean = float(np.abs(means[worst]))
    if max_mean > tol * fmax:
        return LocalTheoremReport("hypothesis_flagged", max_mean / fmax,
                                  tuple(float(v) for v in rhos[worst] * axis),
                                  1.0 + eps, math.nan, math.nan, math.nan)
    reach = 1.0 + eps - delta
    inside = r <= reach
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        g = abel_inverse(f, params)
    rec = abel_forward(g, params)
    max_f = float(np.max(np.abs(f.values[inside]))) / fmax
    max_g = float(np.max(np.abs(g.values[inside]))) / max(float(np.max(np.abs(g.values))), 1e-300)
    max_rec = float(np.max(np.abs(rec.values[inside]))) / fmax
    status = "pass" if max_f <= tol else "counterexample"
    return LocalTheoremReport(status, max_mean / fmax, (), reach, max_f, max_g, max_rec, g.warnings)
