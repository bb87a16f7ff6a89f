"""The fixed-radius spherical mean transform and its spectral structure.

``h = f * delta_R`` where ``delta_R`` is the normalized surface measure of the
radius-``R`` sphere, so ``h(x)`` is the mean of ``f`` over ``S(x, R)``.  In
frequency, ``h_hat(xi) = j_p(R|xi|) f_hat(xi)`` with ``p = (n-2)/2``; the
multiplier equals 1 at ``xi = 0`` and vanishes on the zero rings
``|xi| = z_k / R`` (``z_k`` the positive zeros of ``J_p``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft
from scipy.signal import fftconvolve

from .field import (
    GridField,
    GuardBandError,
    OutOfDomainError,
    default_quadrature,
    fft_workers,
    frequency_magnitude,
    radial_kernel_stencil,
    sample,
    shift_linear,
    sphere_quadrature,
)
from .specfun import bessel_zeros, normalized_j, normalized_j_prime

SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


def radial_eval(func, kmag):
    """Evaluate ``func`` on an array of magnitudes, once per distinct value."""
    uniq, inverse = np.unique(kmag, return_inverse=True)
    return np.asarray(func(uniq), dtype=float)[inverse].reshape(kmag.shape)


@dataclass(frozen=True)
class SphereKernel:
    """Normalized surface measure of the radius-``R`` sphere in ``dim`` dimensions."""

    R: float
    dim: int

    def __post_init__(self):
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ValueError("sphere radius must be positive")
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        object.__setattr__(self, "R", float(self.R))

    @property
    def multiplier_order(self):
        return (self.dim - 2) / 2.0

    def multiplier(self, kmag):
        kmag = np.asarray(kmag, dtype=float)
        return radial_eval(lambda k: normalized_j(self.multiplier_order, self.R * k), kmag)

    def zero_rings(self, count):
        """First ``count`` radii ``|xi|`` on which the multiplier vanishes."""
        return bessel_zeros(self.multiplier_order, count).as_array() / self.R


@dataclass(frozen=True)
class RepresentationKernel:
    """``Psi(x) = j_p(lambda0 |x|)`` on the ball ``|x| <= R``, zero outside.

    ``lambda0 * R`` must be a zero of ``j_p`` so ``Psi`` is continuous at ``|x| = R``.
    """

    R: float
    dim: int
    lambda0: float
    tol: float = 1e-10

    def __post_init__(self):
        SphereKernel(self.R, self.dim)
        p = (self.dim - 2) / 2.0
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")
        if abs(normalized_j(p, self.lambda0 * self.R)) > self.tol:
            raise ValueError(f"lambda0*R = {self.lambda0 * self.R} is not a zero of j_{p}")

    @classmethod
    def from_zero_index(cls, R, dim, index=0):
        z = bessel_zeros((dim - 2) / 2.0, index + 1)[index]
        return cls(R, dim, z / R)

    @property
    def order(self):
        return (self.dim - 2) / 2.0

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        vals = normalized_j(self.order, self.lambda0 * np.abs(r))
        return np.where(np.abs(r) <= self.R * (1 + 1e-12), vals, 0.0)

    def analytic_constant(self):
        """``c`` with ``f * delta_R = c (Laplacian + lambda0^2)(f * Psi)``.

        Follows from the jump of the normal derivative of ``Psi`` across ``|x| = R``.
        """
        slope = normalized_j_prime(self.order, self.lambda0 * self.R)
        return -1.0 / (self.lambda0 * slope * SPHERE_AREA[self.dim] * self.R ** (self.dim - 1))


def _sphere_fits(field, center, t):
    lo = np.asarray(field.origin)
    hi = np.asarray(field.upper())
    c = np.asarray(center, dtype=float)
    slack = 1e-9 * field.spacing
    return bool(np.all(c - t >= lo - slack) and np.all(c + t <= hi + slack))


def spherical_mean(field, center, t, quad=None, order=1):
    """Mean of ``field`` over the sphere ``S(center, t)``.

    ``field`` is a :class:`GridField` (sampled by interpolation of ``order``)
    or a callable taking points of shape ``(k, dim)``.
    """
    if t < 0:
        raise ValueError("radius must be non-negative")
    center = np.asarray(center, dtype=float)
    dim = center.size
    if quad is None:
        spacing = field.spacing if isinstance(field, GridField) else t / 64 + 1e-3
        quad = default_quadrature(dim, t, spacing)
    pts = center[None, :] + t * quad.directions
    if isinstance(field, GridField):
        if not _sphere_fits(field, center, t):
            raise OutOfDomainError(f"sphere S({center.tolist()}, {t}) leaves the grid")
        vals = sample(field, pts, order=order, outside="raise")
    else:
        vals = np.asarray(field(pts), dtype=float)
    return float(np.dot(quad.weights, vals))


def spherical_means(field, centers, t, quad=None, order=1, chunk=256):
    """Vectorized :func:`spherical_mean` over ``centers`` of shape ``(k, dim)``."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if quad is None:
        quad = default_quadrature(field.dim, t, field.spacing)
    lo = np.asarray(field.origin)
    hi = np.asarray(field.upper())
    slack = 1e-9 * field.spacing
    if np.any(centers - t < lo - slack) or np.any(centers + t > hi + slack):
        raise OutOfDomainError("a sphere leaves the grid")
    out = np.empty(len(centers))
    for s in range(0, len(centers), chunk):
        c = centers[s:s + chunk]
        pts = c[:, None, :] + t * quad.directions[None, :, :]
        out[s:s + chunk] = sample(field, pts, order=order, outside="raise") @ quad.weights
    return out


def default_pad(field, R):
    return int(math.ceil(R / field.spacing)) + 1


def _pad(values, pad):
    return np.pad(values, pad) if pad else np.array(values)


def fixed_radius_transform(field, kernel, pad=None, crop=True):
    """``h = f * delta_R`` by the spectral multiplier on a zero-padded grid.

    The field is taken to vanish outside its grid.  ``pad`` zero layers
    (default ``ceil(R/h) + 1``) keep the periodic FFT from wrapping spheres
    around.  With ``crop=False`` the padded result is returned.
    """
    if kernel.dim != field.dim:
        raise ValueError("kernel and field dimensions differ")
    pad = default_pad(field, kernel.R) if pad is None else int(pad)
    if pad * field.spacing < kernel.R:
        raise GuardBandError(f"guard band {pad * field.spacing} is narrower than R = {kernel.R}")
    fp = _pad(field.values, pad)
    spec = scipy.fft.rfftn(fp, workers=fft_workers())
    mult = kernel.multiplier(frequency_magnitude(fp.shape, field.spacing, real=True))
    hp = scipy.fft.irfftn(spec * mult, s=fp.shape, workers=fft_workers())
    if crop:
        core = tuple(slice(pad, pad + n) for n in field.shape)
        return field.with_values(hp[core])
    origin = tuple(o - pad * field.spacing for o in field.origin)
    return GridField(hp, field.spacing, origin)


def quadrature_transform(field, kernel, quad=None):
    """``h`` at every node by direct sphere quadrature, multilinear sampling, zero extension."""
    if quad is None:
        quad = default_quadrature(field.dim, kernel.R, field.spacing)
    acc = np.zeros(field.shape)
    for w, d in zip(quad.weights, quad.directions):
        acc += w * shift_linear(field.values, kernel.R * d / field.spacing)
    return field.with_values(acc)


def interior_mask(field, R):
    """Nodes whose radius-``R`` sphere stays inside the grid."""
    return field.edge_distance() >= R - 1e-9 * field.spacing


@dataclass(frozen=True)
class RepresentationReport:
    residual: float
    constant: float
    analytic_constant: float
    calibrated: bool
    degenerate: bool
    lhs_norm: float


def _representation_sides(values, spacing, rep, pad):
    fp = _pad(values, pad)
    kmag = frequency_magnitude(fp.shape, spacing, real=True)
    lhs = scipy.fft.irfftn(
        scipy.fft.rfftn(fp, workers=fft_workers()) * SphereKernel(rep.R, rep.dim).multiplier(kmag),
        s=fp.shape, workers=fft_workers())
    stencil = radial_kernel_stencil(rep.profile, rep.R, spacing, fp.ndim)
    conv = fftconvolve(fp, stencil, mode="same")
    rhs = scipy.fft.irfftn(scipy.fft.rfftn(conv, workers=fft_workers()) * (rep.lambda0 ** 2 - kmag ** 2),
                           s=fp.shape, workers=fft_workers())
    return lhs, rhs


@lru_cache(maxsize=32)
def _calibrated_constant(dim, R, lambda0, spacing, shape):
    rep = RepresentationKernel(R, dim, lambda0)
    geom = GridField.centered(np.zeros(shape), spacing)
    sigma = R / 5.0
    ref = np.exp(-geom.radius() ** 2 / (2 * sigma ** 2))
    lhs, rhs = _representation_sides(ref, spacing, rep, int(math.ceil(2 * R / spacing)) + 2)
    return float(np.vdot(rhs, lhs).real / np.vdot(rhs, rhs).real)


def representation_check(field, rep, calibrate=True, degenerate_tol=1e-14):
    """Relative L2 residual of ``f * delta_R = c (Laplacian + lambda0^2)(f * Psi)``.

    The Laplacian is spectral.  With ``calibrate`` the constant is the
    least-squares fit on a reference Gaussian (``sigma = R/5``) sampled on
    the same lattice, frozen per ``(dim, R, lambda0, spacing, shape)``;
    otherwise the closed-form constant is used.
    """
    if rep.dim != field.dim:
        raise ValueError("kernel and field dimensions differ")
    pad = int(math.ceil(2 * rep.R / field.spacing)) + 2
    lhs, rhs = _representation_sides(field.values, field.spacing, rep, pad)
    analytic = rep.analytic_constant()
    c = _calibrated_constant(field.dim, rep.R, rep.lambda0, field.spacing, field.shape) if calibrate else analytic
    lnorm = float(np.linalg.norm(lhs))
    scale = float(np.max(np.abs(field.values))) if field.values.size else 0.0
    if lnorm <= degenerate_tol * max(scale, 1e-300) * math.sqrt(lhs.size) or scale == 0.0:
        rnorm = float(np.linalg.norm(c * rhs))
        return RepresentationReport(0.0 if rnorm == 0.0 else math.inf, c, analytic, calibrate, True, lnorm)
    res = float(np.linalg.norm(lhs - c * rhs) / lnorm)
    return RepresentationReport(res, c, analytic, calibrate, False, lnorm)


def ring_points(dim, radius, step):
    """Frequency points on the circle/sphere ``|xi| = radius`` about ``step`` apart."""
    if dim == 2:
        count = max(64, 4 * int(math.ceil(2 * math.pi * radius / step)))
        phi = 2 * math.pi * np.arange(count) / count
        return radius * np.column_stack([np.cos(phi), np.sin(phi)])
    order = max(16, 2 * int(math.ceil(math.pi * radius / step)))
    return radius * sphere_quadrature(3, min(order, 192)).directions


def dtft(values, spacing, freqs):
    """Forward-normalized spectrum (mean at zero) at arbitrary angular frequencies."""
    out = None
    arr = values.astype(complex)
    # contract the last axis first, keeping the frequency index in front
    ndim = values.ndim
    phases = [np.exp(-1j * np.outer(freqs[:, a], spacing * np.arange(n))) for a, n in enumerate(values.shape)]
    out = np.tensordot(arr, phases[-1], axes=([ndim - 1], [1]))  # (..., M)
    for a in range(ndim - 2, -1, -1):
        out = np.einsum("...im,mi->...m", out, phases[a])
    return out / values.size


@dataclass(frozen=True)
class RingReport:
    rings: tuple
    maxima: tuple
    global_max: float
    method: str
    ring_width: float


def spectral_ring_check(h, kernel, k_max=3, method="ring", ring_width=None):
    """Largest ``|h_hat|`` on each of the first ``k_max`` zero rings, over the global spectral max.

    ``method="ring"`` evaluates the spectrum exactly on each ring by direct
    summation.  ``method="bins"`` takes the max over FFT bins within
    ``ring_width`` (default ``1.5`` bin spacings) of the ring.
    """
    spec = scipy.fft.fftn(h.values, norm="forward", workers=fft_workers())
    kmag = frequency_magnitude(h.shape, h.spacing)
    gmax = float(np.max(np.abs(spec)))
    rings = kernel.zero_rings(k_max)
    dxi = max(2 * math.pi / (n * h.spacing) for n in h.shape)
    width = 1.5 * dxi if ring_width is None else float(ring_width)
    maxima = []
    for lam in rings:
        if gmax == 0.0:
            maxima.append(0.0)
            continue
        if method == "bins":
            sel = np.abs(kmag - lam) <= width
            m = float(np.max(np.abs(spec[sel]))) if sel.any() else 0.0
        elif method == "ring":
            pts = ring_points(h.dim, lam, dxi)
            m = float(np.max(np.abs(dtft(h.values, h.spacing, pts))))
        else:
            raise ValueError(f"unknown method {method!r}")
        maxima.append(m / gmax)
    return RingReport(tuple(float(r) for r in rings), tuple(maxima), gmax, method, width)
