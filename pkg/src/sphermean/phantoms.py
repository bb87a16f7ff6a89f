"""Seeded test fields and masks on centered grids."""
from __future__ import annotations

import numpy as np

from .abel import smooth_bump
from .field import GridField
from .geometry import DomainMask


def grid(dim, shape, spacing):
    shape = (shape,) * dim if np.isscalar(shape) else tuple(shape)
    return GridField.centered(np.zeros(shape), spacing)


def gaussian(dim, shape, spacing, sigma=0.1, center=None):
    g = grid(dim, shape, spacing)
    X = g.coords()
    c = np.zeros(dim) if center is None else np.asarray(center, float)
    d2 = sum((X[i] - c[i]) ** 2 for i in range(dim))
    return g.with_values(np.exp(-d2 / (2 * sigma ** 2)))


def radial_bump(dim, shape, spacing, radius=0.9, center=None, amplitude=1.0):
    """C-infinity bump ``exp(1 - 1/(1 - |x-c|^2/rho^2))`` supported in the open ball."""
    g = grid(dim, shape, spacing)
    X = g.coords()
    c = np.zeros(dim) if center is None else np.asarray(center, float)
    r = np.sqrt(sum((X[i] - c[i]) ** 2 for i in range(dim)))
    return g.with_values(amplitude * smooth_bump(r, -radius, radius))


def add(*fields):
    out = fields[0].values.copy()
    for f in fields[1:]:
        out = out + f.values
    return fields[0].with_values(out)


def random_bumps(dim, shape, spacing, count, rng, extent=0.8, radius=(0.1, 0.3)):
    """Sum of ``count`` seeded bumps with centers in ``[-extent, extent]^dim``."""
    g = grid(dim, shape, spacing)
    total = np.zeros(g.shape)
    for _ in range(count):
        c = rng.uniform(-extent, extent, dim)
        rho = rng.uniform(*radius)
        amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
        total += radial_bump(dim, g.shape, spacing, rho, c, amp).values
    return g.with_values(total)


def disk_mask(dim, shape, spacing, radius=1.0, center=None):
    g = grid(dim, shape, spacing)
    X = g.coords()
    c = np.zeros(dim) if center is None else np.asarray(center, float)
    return DomainMask.like(g, sum((X[i] - c[i]) ** 2 for i in range(dim)) <= radius ** 2)


def square_mask(dim, shape, spacing, half_side=0.8):
    g = grid(dim, shape, spacing)
    return DomainMask.like(g, np.all(np.abs(g.coords()) <= half_side, axis=0))


def two_disk_mask(shape, spacing, radius=1.0, gap=2.5):
    """Two disks of ``radius`` whose centers are ``gap`` apart along the first axis."""
    a = disk_mask(2, shape, spacing, radius, (-gap / 2, 0.0)).values
    b = disk_mask(2, shape, spacing, radius, (gap / 2, 0.0)).values
    g = grid(2, shape, spacing)
    return DomainMask.like(g, a | b)


def lshape_mask(shape, spacing, half_side=1.0, fillet=0.6):
    """Square ``[-s, s]^2`` minus its first quadrant, with the notch corner
    rounded: the removed region is the union of ``fillet``-disks inside the
    quadrant, so its corner is an arc of radius ``fillet``.
    """
    g = grid(2, shape, spacing)
    X, Y = g.coords()
    square = (np.abs(X) <= half_side) & (np.abs(Y) <= half_side)
    quadrant = (X > 0) & (Y > 0)
    rounded = (X >= fillet) | (Y >= fillet) | ((X - fillet) ** 2 + (Y - fillet) ** 2 <= fillet ** 2)
    return DomainMask.like(g, square & ~(quadrant & rounded))


def random_blob_mask(shape, rng, count=None, spacing=1.0):
    """Union of 1-3 seeded disks (radii 3-9 voxels) well inside a small grid."""
    n = shape[0]
    I, J = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="ij")
    m = np.zeros(shape, bool)
    count = int(rng.integers(1, 4)) if count is None else count
    for _ in range(count):
        c = rng.uniform(n / 4, 3 * n / 4, 2)
        r = rng.uniform(3, 9)
        m |= (I - c[0]) ** 2 + (J - c[1]) ** 2 <= r * r
    return DomainMask.centered(m, spacing)


def masked_bumps(mask, count, rng, radius=(0.1, 0.3), margin=None):
    """Seeded bumps whose supports lie inside ``mask`` (distance-map test)."""
    from scipy import ndimage

    dist = ndimage.distance_transform_edt(mask.values) * mask.spacing
    X = mask.coords()
    total = np.zeros(mask.shape)
    placed = 0
    tries = 0
    while placed < count and tries < 1000:
        tries += 1
        rho = rng.uniform(*radius)
        room = dist > rho + (2 * mask.spacing if margin is None else margin)
        if not room.any():
            continue
        idx = np.argwhere(room)
        c = idx[rng.integers(len(idx))]
        center = [X[i][tuple(c)] for i in range(mask.dim)]
        r = np.sqrt(sum((X[i] - center[i]) ** 2 for i in range(mask.dim)))
        total += rng.uniform(0.5, 1.5) * smooth_bump(r, -rho, rho)
        placed += 1
    return GridField(total, mask.spacing, mask.origin)
