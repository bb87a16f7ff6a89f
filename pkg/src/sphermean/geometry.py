"""Voxel domains, ball morphology and the R-convexity predicate.

A bounded closed set ``K`` is R-convex when its complement is a union of
closed R-balls whose centers form a connected set.  On a lattice the center
set is ``C = erode(complement(K), R)``; coverage is ``dilate(C, R)``.

Morphology uses the exact Euclidean distance transform, so a lattice point
``q`` belongs to the ball about ``p`` iff ``|q - p| <= R/h + 1e-9`` voxels.
Voxels beyond the grid count as part of a mask under erosion and outside it
under dilation, which keeps ``erode(M) == ~dilate(~M)`` exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DomainMask:
    """Boolean voxel set on a uniform lattice (``True`` = inside)."""

    values: np.ndarray
    spacing: float
    origin: tuple

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim not in (2, 3):
            raise ValueError("masks are 2-D or 3-D")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        v = v.astype(bool, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))

    @classmethod
    def like(cls, field, values):
        return cls(values, field.spacing, field.origin)

    @classmethod
    def centered(cls, values, spacing):
        values = np.asarray(values)
        return cls(values, spacing, tuple(-(n // 2) * spacing for n in values.shape))

    @property
    def dim(self):
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def with_values(self, values):
        return DomainMask(values, self.spacing, self.origin)

    def complement(self):
        return self.with_values(~self.values)

    def is_bounded(self):
        """No ``True`` voxel on the outermost lattice layer."""
        v = self.values
        for axis in range(v.ndim):
            if v.take(0, axis=axis).any() or v.take(-1, axis=axis).any():
                return False
        return True

    def point_of(self, index):
        return tuple(o + i * self.spacing for o, i in zip(self.origin, index))

    def coords(self):
        axes = [o + self.spacing * np.arange(n) for o, n in zip(self.origin, self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True)
class BallElement:
    """Closed lattice ball of radius ``radius_voxels`` (in units of the spacing)."""

    radius_voxels: float

    def __post_init__(self):
        if not (self.radius_voxels >= 0 and math.isfinite(self.radius_voxels)):
            raise ValueError("ball radius must be finite and non-negative")

    @classmethod
    def from_radius(cls, R, spacing):
        return cls(R / spacing)

    def offsets(self):
        m = int(math.floor(self.radius_voxels + TIE_TOLERANCE))
        ax = np.arange(-m, m + 1)
        return ax, m

    def footprint(self, dim):
        ax, _ = self.offsets()
        grids = np.meshgrid(*([ax] * dim), indexing="ij")
        return sum(g * g for g in grids) <= (self.radius_voxels + TIE_TOLERANCE) ** 2

    def offset_list(self, dim):
        ax, m = self.offsets()
        return np.argwhere(self.footprint(dim)) - m


def _check_ball(mask, ball):
    if 2 * ball.radius_voxels + 1 > max(mask.shape):
        raise ValueError("ball is larger than the grid")


def erode(mask, ball):
    """Voxels whose whole closed ball lies in ``mask`` (off-grid counts as inside)."""
    _check_ball(mask, ball)
    v = mask.values
    if v.all():
        return mask.with_values(np.ones_like(v))
    if not v.any():
        return mask.with_values(np.zeros_like(v))
    dist = ndimage.distance_transform_edt(v)
    return mask.with_values(dist > ball.radius_voxels + TIE_TOLERANCE)


def dilate(mask, ball):
    """Voxels within the ball radius of ``mask`` (off-grid counts as outside)."""
    _check_ball(mask, ball)
    v = mask.values
    if not v.any():
        return mask.with_values(np.zeros_like(v))
    if v.all():
        return mask.with_values(np.ones_like(v))
    dist = ndimage.distance_transform_edt(~v)
    return mask.with_values(dist <= ball.radius_voxels + TIE_TOLERANCE)


def center_set(K, R):
    """Centers of closed R-balls avoiding ``K``: ``erode(complement(K), R)``."""
    if K.values.all():
        raise ValueError("K has an empty complement")
    return erode(K.complement(), BallElement.from_radius(R, K.spacing))


@dataclass(frozen=True)
class Components:
    labels: np.ndarray
    count: int
    sizes: tuple

    def representatives(self):
        """One voxel index per component, in label order."""
        out = []
        for lab in range(1, self.count + 1):
            idx = np.argwhere(self.labels == lab)[0]
            out.append(tuple(int(i) for i in idx))
        return out


def connected_components(mask):
    """Face-adjacent components (4-neighbourhood in 2-D, 6 in 3-D)."""
    v = mask.values if isinstance(mask, DomainMask) else np.asarray(mask, bool)
    labels, count = ndimage.label(v)
    sizes = tuple(int(s) for s in np.bincount(labels.ravel(), minlength=count + 1)[1:])
    return Components(labels, int(count), sizes)


@dataclass(frozen=True)
class RConvexVerdict:
    status: str
    R: float
    centers: DomainMask
    component_count: int
    uncovered_count: int
    witness_index: tuple
    witness_point: tuple
    component_representatives: tuple

    @property
    def is_r_convex(self):
        return self.status == "r_convex"


def _padded(K, pad):
    v = np.pad(K.values, pad, constant_values=False)
    origin = tuple(o - pad * K.spacing for o in K.origin)
    return DomainMask(v, K.spacing, origin)


def r_convex(K, R):
    """R-convexity verdict for a bounded voxel set ``K``.

    The lattice is padded by ``ceil(R/h) + 2`` empty layers so balls may be
    centered beyond the grid.  Coverage ignores complement voxels within one
    Chebyshev step of ``K``.  A coverage failure reports the uncovered voxel
    farthest from ``K``; a connectivity failure reports one voxel per
    component of the center set.
    """
    if R < 2 * K.spacing:
        raise ValueError("R must be at least two grid spacings")
    if not K.values.any():
        raise ValueError("K is empty")
    if not K.is_bounded():
        raise ValueError("K touches the grid boundary")
    pad = int(math.ceil(R / K.spacing)) + 2
    Kp = _padded(K, pad)
    ball = BallElement.from_radius(R, K.spacing)
    C = center_set(Kp, R)
    covered = dilate(C, ball).values
    shell = ndimage.binary_dilation(Kp.values, structure=np.ones((3,) * K.dim, bool))
    uncovered = ~Kp.values & ~covered & ~shell
    core = tuple(slice(pad, pad + n) for n in K.shape)
    comps = connected_components(C)
    reps = tuple(tuple(i - pad for i in rep) for rep in comps.representatives())
    centers = DomainMask(C.values[core], K.spacing, K.origin)
    n_unc = int(uncovered.sum())
    if n_unc:
        dist = ndimage.distance_transform_edt(~Kp.values)
        flat = np.where(uncovered, dist, -1.0)
        idx = np.unravel_index(int(np.argmax(flat)), flat.shape)
        widx = tuple(int(i) - pad for i in idx)
        status = "coverage_fail_witness"
    else:
        widx = ()
        status = "r_convex" if comps.count == 1 else "disconnected_witness"
    wpt = K.point_of(widx) if widx else ()
    return RConvexVerdict(status, float(R), centers, comps.count, n_unc, widx, wpt, reps)


def _stamp(mask, offsets):
    """OR of ``mask`` shifted by every offset (zero fill at the edges)."""
    out = np.zeros_like(mask)
    for off in offsets:
        src, dst = [], []
        for o, n in zip(off, mask.shape):
            src.append(slice(max(0, -o), n - max(0, o)))
            dst.append(slice(max(0, o), n - max(0, -o)))
        out[tuple(dst)] |= mask[tuple(src)]
    return out


def brute_force_r_convex(K, R):
    """Exhaustive oracle for :func:`r_convex` without distance transforms.

    Every ``K`` voxel stamps the lattice ball to forbid nearby centers, then
    every admissible center stamps its ball to mark coverage.  Padding,
    tolerance and shell conventions match :func:`r_convex`.
    """
    pad = int(math.ceil(R / K.spacing)) + 2
    v = np.pad(K.values, pad, constant_values=False)
    offsets = BallElement.from_radius(R, K.spacing).offset_list(v.ndim)
    centers = ~_stamp(v, offsets)
    covered = _stamp(centers, offsets)
    shell = ndimage.binary_dilation(v, structure=np.ones((3,) * v.ndim, bool))
    if np.any(~v & ~shell & ~covered):
        return "coverage_fail_witness"
    count = ndimage.label(centers)[1]
    return "r_convex" if count == 1 else "disconnected_witness"
