"""Sampled fields on uniform grids and the operations that act on them.

Conventions
-----------
* Coordinates: sample ``i`` along an axis sits at ``origin[axis] + i*spacing``.
  :meth:`GridField.centered` puts the physical origin on the node ``N//2``.
* Spectra: ``fftn(values, norm="forward")`` in numpy's ``fftfreq`` bin order,
  so the zero bin holds the mean.  Angular frequencies are
  ``2*pi*fftfreq(N, spacing)``; the transform ignores ``origin`` (a pure
  phase factor, irrelevant to radial multipliers).
* Sphere measure: normalized to total mass 1.
* Harmonics: real and orthonormal against the normalized measure.  In 2-D,
  ``(m=0, l=1) -> 1``, ``(m, 1) -> sqrt(2) cos(m*phi)``, ``(m, 2) -> sqrt(2) sin(m*phi)``.
  In 3-D, ``l = 1..2m+1`` maps to ``k = l - m - 1`` in ``[-m, m]``: cosine
  type for ``k > 0``, sine type for ``k < 0``.
* Files: raw little-endian float64 plus a JSON sidecar (same stem, ``.json``)
  holding ``{dim, shape, spacing, origin, order: "row-major"}``.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field as dc_field
from math import factorial
from pathlib import Path

import numpy as np
import scipy.fft
from scipy.interpolate import CubicSpline
from scipy.ndimage import map_coordinates
from scipy.signal import fftconvolve
from scipy.special import lpmv

MAX_HARMONIC_DEGREE = 8


class GuardBandError(ValueError):
    """A convolution would reach beyond the zero guard band around the data."""


class OutOfDomainError(ValueError):
    """A requested sample point lies outside the sampled grid."""


def fft_workers():
    """Worker count for scipy.fft, capped by ``SPHERMEAN_THREADS``."""
    raw = os.environ.get("SPHERMEAN_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _readonly(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridField:
    """Real scalar field on a uniform isotropic grid in 2 or 3 dimensions."""

    values: np.ndarray
    spacing: float
    origin: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim not in (2, 3):
            raise ValueError(f"only 2-D and 3-D fields are supported, got {values.ndim}-D")
        if min(values.shape) < 8:
            raise ValueError("every axis needs at least 8 samples")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError("spacing must be positive")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        origin = tuple(float(o) for o in self.origin)
        if len(origin) != values.ndim:
            raise ValueError("origin length must match dimension")
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "origin", origin)

    @classmethod
    def centered(cls, values, spacing):
        values = np.asarray(values, dtype=float)
        origin = tuple(-(n // 2) * spacing for n in values.shape)
        return cls(values, spacing, origin)

    @classmethod
    def from_function(cls, func, shape, spacing):
        """Sample ``func(X)`` where ``X`` has shape ``(dim, *shape)`` on a centered grid."""
        geom = cls.centered(np.zeros(shape), spacing)
        return geom.with_values(func(geom.coords()))

    @property
    def dim(self):
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def axes(self):
        return [o + self.spacing * np.arange(n) for o, n in zip(self.origin, self.shape)]

    def coords(self):
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"))

    def radius(self):
        return np.sqrt(np.sum(self.coords() ** 2, axis=0))

    def with_values(self, values):
        return GridField(values, self.spacing, self.origin)

    def upper(self):
        return tuple(o + (n - 1) * self.spacing for o, n in zip(self.origin, self.shape))

    def edge_distance(self):
        """Physical distance from every node to the nearest grid face."""
        d = None
        for axis, (lo, hi) in enumerate(zip(self.origin, self.upper())):
            c = self.axes()[axis]
            da = np.minimum(c - lo, hi - c)
            shape = [1] * self.dim
            shape[axis] = -1
            da = da.reshape(shape)
            d = da if d is None else np.minimum(d, da)
        return np.broadcast_to(d, self.shape)

    def inscribed_radius(self, center=None):
        center = np.zeros(self.dim) if center is None else np.asarray(center, float)
        return float(min(min(c - lo, hi - c) for c, lo, hi in zip(center, self.origin, self.upper())))

    def index_of(self, point):
        return tuple(int(round((p - o) / self.spacing)) for p, o in zip(point, self.origin))

    def point_of(self, index):
        return tuple(o + i * self.spacing for o, i in zip(self.origin, index))


@dataclass(frozen=True)
class SpectralField:
    """Complex spectrum of a :class:`GridField` (``norm="forward"`` convention)."""

    values: np.ndarray
    spacing: float
    origin: tuple

    @property
    def shape(self):
        return self.values.shape

    @property
    def dim(self):
        return self.values.ndim

    def frequencies(self):
        return [2 * np.pi * np.fft.fftfreq(n, d=self.spacing) for n in self.shape]

    def magnitude(self):
        grids = np.meshgrid(*self.frequencies(), indexing="ij", sparse=True)
        return np.sqrt(sum(g * g for g in grids))

    def bin_spacing(self):
        return max(2 * np.pi / (n * self.spacing) for n in self.shape)


def fft_forward(field):
    spec = scipy.fft.fftn(field.values, norm="forward", workers=fft_workers())
    return SpectralField(spec, field.spacing, field.origin)


def fft_inverse(spec):
    values = scipy.fft.ifftn(spec.values, norm="forward", workers=fft_workers())
    return GridField(values.real, spec.spacing, spec.origin)


def frequency_magnitude(shape, spacing, real=False):
    """``|xi|`` on the (r)fftn bin layout for a grid of ``shape``."""
    freqs = [2 * np.pi * np.fft.fftfreq(n, d=spacing) for n in shape]
    if real:
        freqs[-1] = 2 * np.pi * np.fft.rfftfreq(shape[-1], d=spacing)
    grids = np.meshgrid(*freqs, indexing="ij", sparse=True)
    return np.sqrt(sum(g * g for g in grids))


@dataclass(frozen=True)
class RadialProfile:
    """Values of a radial function on ``r_i = i * r_max / (count - 1)``.

    ``valid`` flags radii whose sampling sphere stayed inside the source grid.
    """

    r_max: float
    values: np.ndarray
    valid: np.ndarray = dc_field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 16:
            raise ValueError("a radial profile needs at least 16 samples")
        if not np.all(np.isfinite(values)):
            raise ValueError("profile values must be finite")
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        valid = np.ones(values.size, bool) if self.valid is None else np.asarray(self.valid, bool)
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "valid", _readonly(valid))
        object.__setattr__(self, "r_max", float(self.r_max))

    @classmethod
    def from_function(cls, func, r_max, count):
        r = np.linspace(0.0, r_max, count)
        return cls(r_max, func(r))

    @property
    def count(self):
        return self.values.size

    @property
    def step(self):
        return self.r_max / (self.count - 1)

    def radii(self):
        return np.linspace(0.0, self.r_max, self.count)

    def spline(self):
        # even extension keeps the interpolant smooth through r = 0
        r = self.radii()
        rr = np.concatenate([-r[:0:-1], r])
        vv = np.concatenate([self.values[:0:-1], self.values])
        return CubicSpline(rr, vv)

    def __call__(self, r, kind="cubic", outside=0.0):
        r = np.abs(np.asarray(r, dtype=float))
        if kind == "linear":
            out = np.interp(r, self.radii(), self.values, right=outside)
        else:
            out = self.spline()(np.minimum(r, self.r_max))
            out = np.where(r > self.r_max * (1 + 1e-12), outside, out)
        return out


@dataclass(frozen=True)
class SphereQuadrature:
    """Directions on the unit sphere with positive weights summing to one."""

    dim: int
    directions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.directions, float)
        w = np.asarray(self.weights, float)
        if d.ndim != 2 or d.shape[1] != self.dim or d.shape[0] != w.size:
            raise ValueError("directions must have shape (count, dim)")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")
        if np.max(np.abs(np.linalg.norm(d, axis=1) - 1)) > 1e-12:
            raise ValueError("directions must be unit vectors")
        object.__setattr__(self, "directions", _readonly(d))
        object.__setattr__(self, "weights", _readonly(w))

    def __len__(self):
        return self.weights.size

    def integrate(self, func):
        return float(np.dot(self.weights, func(self.directions)))


def sphere_quadrature(dim, order):
    """Equal-angle rule (2-D) or Gauss-Legendre x trapezoid product rule (3-D).

    The 3-D rule integrates spherical polynomials of degree ``<= order/2``
    exactly; its azimuth count is a multiple of four so the rule shares the
    lattice's quarter-turn symmetry.
    """
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    if order < 8:
        raise ValueError("quadrature order must be >= 8")
    order = int(order)
    if dim == 2:
        phi = 2 * np.pi * np.arange(order) / order
        dirs = np.column_stack([np.cos(phi), np.sin(phi)])
        return SphereQuadrature(2, dirs, np.full(order, 1.0 / order))
    n_theta = order // 2 + 1
    n_phi = 4 * math.ceil((order + 1) / 4)
    z, wz = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    Z, P = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(1 - Z * Z)
    dirs = np.column_stack([(s * np.cos(P)).ravel(), (s * np.sin(P)).ravel(), Z.ravel()])
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    w = (wz[:, None] / 2 * np.full(n_phi, 1.0 / n_phi)[None, :]).ravel()
    return SphereQuadrature(3, dirs, w / w.sum())


def default_quadrature(dim, radius, spacing, minimum=64):
    """Rule fine enough that node spacing on a sphere of ``radius`` is below ``spacing/2``."""
    order = max(minimum, 8 * math.ceil(math.pi * radius / spacing / 2))
    if dim == 3:
        order = min(order, 256)
    return sphere_quadrature(dim, order)


def sample(field, points, order=1, outside="raise"):
    """Interpolate ``field`` at physical ``points`` of shape ``(..., dim)``.

    ``order=1`` is multilinear.  ``outside="zero"`` extends the field by zero.
    """
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, field.dim)
    idx = (flat - np.asarray(field.origin)) / field.spacing
    if outside == "raise":
        upper = np.asarray(field.shape) - 1
        if np.any(idx < -1e-9) or np.any(idx > upper + 1e-9):
            raise OutOfDomainError("sample point outside the grid")
        idx = np.clip(idx, 0, upper)
    vals = map_coordinates(field.values, idx.T, order=order, mode="constant", cval=0.0,
                           prefilter=order > 1)
    return vals.reshape(pts.shape[:-1])


def shift_linear(values, shift):
    """``out[i] = values(i + shift)`` by multilinear interpolation, zero outside."""
    out = np.zeros_like(values)
    base = [math.floor(s) for s in shift]
    frac = [s - b for s, b in zip(shift, base)]
    for corner in np.ndindex(*(2,) * values.ndim):
        w = 1.0
        for c, f in zip(corner, frac):
            w *= f if c else 1.0 - f
        if w == 0.0:
            continue
        offs = [b + c for b, c in zip(base, corner)]
        src, dst = [], []
        skip = False
        for o, n in zip(offs, values.shape):
            if abs(o) >= n:
                skip = True
                break
            if o >= 0:
                src.append(slice(o, n))
                dst.append(slice(0, n - o))
            else:
                src.append(slice(0, n + o))
                dst.append(slice(-o, n))
        if not skip:
            out[tuple(dst)] += w * values[tuple(src)]
    return out


def radialize(field, profile_count, r_max=None, quad=None, order=1):
    """Angular average of ``field`` over spheres centered at the physical origin.

    Radii whose sphere leaves the grid are computed with zero extension and
    flagged invalid in the returned profile.
    """
    return _angular_project(field, profile_count, r_max, quad, order, weight=None)


def _angular_project(field, profile_count, r_max, quad, order, weight):
    if profile_count < 16:
        raise ValueError("profile_count must be >= 16")
    inscribed = field.inscribed_radius()
    if inscribed < 0:
        raise OutOfDomainError("the physical origin is not inside the grid")
    corner = float(np.sqrt(sum(max(abs(lo), abs(hi)) ** 2 for lo, hi in zip(field.origin, field.upper()))))
    if r_max is None:
        r_max = inscribed
    if r_max > corner:
        raise OutOfDomainError(f"profile radius {r_max} beyond grid extent {corner}")
    if quad is None:
        quad = default_quadrature(field.dim, r_max, field.spacing)
    w = quad.weights if weight is None else quad.weights * weight(quad.directions)
    radii = np.linspace(0.0, r_max, profile_count)
    pts = radii[:, None, None] * quad.directions[None, :, :]
    vals = sample(field, pts, order=order, outside="zero")
    return RadialProfile(r_max, vals @ w, valid=radii <= inscribed + 1e-12)


def harmonic_count(dim, m):
    """Dimension ``d(m)`` of the degree-``m`` harmonics."""
    if dim == 2:
        return 1 if m == 0 else 2
    if dim == 3:
        return 2 * m + 1
    raise ValueError("dim must be 2 or 3")


def real_harmonic(dim, m, l, directions):
    """Orthonormal real harmonic ``Y^m_l`` (normalized measure) at unit ``directions``."""
    if not (0 <= m <= MAX_HARMONIC_DEGREE):
        raise ValueError(f"degree must lie in [0, {MAX_HARMONIC_DEGREE}]")
    if not (1 <= l <= harmonic_count(dim, m)):
        raise ValueError(f"order index l={l} outside [1, {harmonic_count(dim, m)}]")
    d = np.asarray(directions, float)
    if dim == 2:
        phi = np.arctan2(d[..., 1], d[..., 0])
        if m == 0:
            return np.ones(d.shape[:-1])
        trig = np.cos if l == 1 else np.sin
        return np.sqrt(2.0) * trig(m * phi)
    k = l - m - 1
    ak = abs(k)
    z = np.clip(d[..., 2], -1.0, 1.0)
    phi = np.arctan2(d[..., 1], d[..., 0])
    norm = math.sqrt((2 * m + 1) * factorial(m - ak) / factorial(m + ak))
    leg = lpmv(ak, m, z)
    if k == 0:
        return norm * leg
    trig = np.cos if k > 0 else np.sin
    return math.sqrt(2.0) * norm * leg * trig(ak * phi)


def harmonic_project(field, m, l, profile_count=64, r_max=None, quad=None, order=1):
    """Radial coefficient ``f_{m,l}(r) = int f(r theta) Y^m_l(theta) dtheta``."""
    harmonic_count(field.dim, m)
    real_harmonic(field.dim, m, l, np.eye(field.dim)[:1])
    return _angular_project(field, profile_count, r_max, quad, order,
                            weight=lambda dirs: real_harmonic(field.dim, m, l, dirs))


def radial_field(profile, like, outside=0.0):
    """Sample a radial function (profile or callable of ``r``) on the grid of ``like``."""
    r = like.radius()
    vals = profile(r) if not isinstance(profile, RadialProfile) else profile(r, outside=outside)
    return like.with_values(vals)


def radial_kernel_stencil(kernel, support, spacing, dim):
    """Lattice samples of a radial kernel inside ``|x| <= support``, times the cell volume."""
    m = int(math.floor(support / spacing + 1e-9))
    ax = spacing * np.arange(-m, m + 1)
    grids = np.meshgrid(*([ax] * dim), indexing="ij")
    r = np.sqrt(sum(g * g for g in grids))
    vals = kernel(r) if not isinstance(kernel, RadialProfile) else kernel(np.minimum(r, kernel.r_max))
    return np.where(r <= support * (1 + 1e-12), vals, 0.0) * spacing ** dim


def convolve_radial(field, kernel, support):
    """Linear n-D convolution of ``field`` with a radial kernel supported in ``[0, support]``.

    The kernel (profile or callable of ``r``) is sampled on the lattice and
    applied by zero-padded FFT convolution, so nothing wraps around.
    """
    if support < 0:
        raise ValueError("support must be non-negative")
    if isinstance(kernel, RadialProfile) and support > kernel.r_max * (1 + 1e-12):
        raise GuardBandError("kernel support exceeds the sampled kernel profile")
    if 2 * support > min(field.shape) * field.spacing:
        raise GuardBandError("kernel support exceeds half the grid extent")
    stencil = radial_kernel_stencil(kernel, support, field.spacing, field.dim)
    out = fftconvolve(field.values, stencil, mode="same")
    return field.with_values(out)


def sidecar_path(path):
    return Path(path).with_suffix(".json")


def save_field(path, field):
    """Write ``field`` as raw little-endian float64 plus the JSON sidecar."""
    path = Path(path)
    np.ascontiguousarray(field.values, dtype="<f8").tofile(path)
    meta = {
        "dim": field.dim,
        "shape": list(field.shape),
        "spacing": field.spacing,
        "origin": list(field.origin),
        "order": "row-major",
    }
    sidecar_path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def load_field(path):
    path = Path(path)
    meta = json.loads(sidecar_path(path).read_text())
    if meta.get("order", "row-major") != "row-major":
        raise ValueError("only row-major field files are supported")
    shape = tuple(int(s) for s in meta["shape"])
    if len(shape) != int(meta["dim"]):
        raise ValueError("sidecar dim does not match shape")
    values = np.fromfile(path, dtype="<f8")
    if values.size != int(np.prod(shape)):
        raise ValueError(f"{path}: expected {np.prod(shape)} values, found {values.size}")
    return GridField(values.reshape(shape), float(meta["spacing"]), tuple(meta["origin"]))


def save_profile_csv(path, profile, header=("r", "value")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r, v in zip(profile.radii(), profile.values):
            w.writerow([f"{r:.17g}", f"{v:.17g}"])


def load_profile_csv(path):
    """Read a two-column CSV (uniform radii starting at 0) as ``(r_max, values)``."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    r = np.array([float(a) for a, _ in rows])
    v = np.array([float(b) for _, b in rows])
    if r.size < 2 or abs(r[0]) > 1e-12 or np.any(np.abs(np.diff(r) - (r[-1] / (r.size - 1))) > 1e-9 * max(1.0, r[-1])):
        raise ValueError(f"{path}: radii must be uniform and start at 0")
    return float(r[-1]), v


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True
