"""Bessel functions of the first kind and the normalized (spherical) Bessel function.

Real arguments use the ascending power series for ``x <= 8`` and the
integral representation

    J_nu(x) = (1/pi) int_0^pi cos(nu*t - x*sin t) dt
              - (sin(nu*pi)/pi) int_0^inf exp(-x*sinh t - nu*t) dt

beyond that.  The first integral is done by Gauss-Legendre, the second by
Gauss-Laguerre after the substitution ``u = x*sinh t``.  Absolute error is
around 1e-14 for ``x <= 50, nu <= 10``.

Complex arguments (only needed by :func:`lower_bound_check`) go through the
power series in extended precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln

SERIES_CUTOFF = 8.0
SERIES_TERMS = 48
COMPLEX_ABS_MAX = 60.0
EXCLUSION_DISK_RADIUS = math.pi / 6


def _check_order(nu):
    nu = float(nu)
    if not math.isfinite(nu) or nu < 0:
        raise ValueError(f"Bessel order must be finite and >= 0, got {nu!r}")
    return nu


def _check_argument(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("Bessel argument must be finite")
    if np.any(arr < 0):
        raise ValueError("Bessel argument must be >= 0")
    return arr


@lru_cache(maxsize=64)
def _legendre(n):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=4)
def _laguerre(n):
    return np.polynomial.laguerre.laggauss(n)


def _series_normalized(p, lam):
    # sum_k (-lam^2/4)^k Gamma(p+1) / (k! Gamma(k+p+1)); equals 1 at lam = 0
    q = -0.25 * lam * lam
    term = np.ones_like(lam)
    total = np.ones_like(lam)
    for k in range(1, SERIES_TERMS):
        term = term * q / (k * (k + p))
        total = total + term
    return total


def _integral_j(nu, x, chunk=8192):
    out = np.empty_like(x)
    sin_nu = math.sin(nu * math.pi)
    u, wu = _laguerre(80)
    for start in range(0, x.size, chunk):
        xs = x[start:start + chunk]
        t, w = _legendre(int(2 * xs.max()) + 40)
        theta = 0.5 * math.pi * (t + 1.0)
        first = np.cos(nu * theta[None, :] - xs[:, None] * np.sin(theta)[None, :]) @ w
        val = 0.5 * first
        if sin_nu != 0.0:
            g = np.exp(-nu * np.arcsinh(u[None, :] / xs[:, None]))
            g /= np.sqrt(xs[:, None] ** 2 + u[None, :] ** 2)
            val = val - sin_nu / math.pi * (g @ wu)
        out[start:start + chunk] = val
    return out


def bessel_j(nu, x):
    """Bessel function of the first kind ``J_nu(x)`` for ``nu >= 0, x >= 0``.

    Accepts a scalar or an array for ``x``; returns the same shape.
    """
    nu = _check_order(nu)
    arr = _check_argument(x)
    flat = arr.ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_CUTOFF
    if small.any():
        xs = flat[small]
        with np.errstate(divide="ignore"):
            if nu == 0:
                pref = np.ones_like(xs)
            else:
                pref = np.where(xs > 0, np.exp(nu * np.log(np.where(xs > 0, xs, 1.0) / 2) - gammaln(nu + 1)), 0.0)
        out[small] = pref * _series_normalized(nu, xs)
    if (~small).any():
        out[~small] = _integral_j(nu, flat[~small])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def normalized_j(p, lam):
    """Normalized Bessel function ``2^p Gamma(p+1) J_p(lam) / lam^p``, equal to 1 at 0."""
    p = _check_order(p)
    arr = _check_argument(lam)
    flat = arr.ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_CUTOFF
    if small.any():
        out[small] = _series_normalized(p, flat[small])
    if (~small).any():
        xs = flat[~small]
        scale = np.exp(p * math.log(2.0) + gammaln(p + 1) - p * np.log(xs))
        out[~small] = scale * _integral_j(p, xs)
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def normalized_j_prime(p, lam):
    """Derivative of :func:`normalized_j` in ``lam``.

    Uses ``j_p'(lam) = -lam * j_{p+1}(lam) / (2(p+1))``.
    """
    p = _check_order(p)
    arr = _check_argument(lam)
    out = -arr * np.asarray(normalized_j(p + 1, arr)) / (2.0 * (p + 1.0))
    return float(out) if np.ndim(out) == 0 else out


def bessel_j_prime(nu, x):
    """``J_nu'(x)`` via ``J_nu' = (nu/x) J_nu - J_{nu+1}``."""
    nu = _check_order(nu)
    arr = _check_argument(x)
    if nu == 0:
        out = -np.asarray(bessel_j(1.0, arr))
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(arr > 0, nu / np.where(arr > 0, arr, 1.0) * np.asarray(bessel_j(nu, arr)), 0.0)
        out = out - np.asarray(bessel_j(nu + 1, arr))
        if nu == 1:
            out = np.where(arr == 0, 0.5, out)
    return float(out) if np.ndim(out) == 0 else out


def bessel_j_complex(nu, z):
    """``J_nu(z)`` for complex ``z`` (principal branch) by the power series.

    Evaluated with mpmath at a working precision large enough to absorb the
    cancellation of the series; restricted to ``|z| <= 60``.
    """
    nu = _check_order(nu)
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("argument must be finite")
    if abs(z) > COMPLEX_ABS_MAX:
        raise ValueError(f"complex evaluation limited to |z| <= {COMPLEX_ABS_MAX}")
    dps = 30 + int(abs(z) / 2.0)
    with mpmath.workdps(dps):
        zz = mpmath.mpc(z.real, z.imag)
        q = -(zz / 2) ** 2
        term = mpmath.mpf(1) / mpmath.gamma(nu + 1)
        total = term
        k = 0
        eps = mpmath.mpf(10) ** (-dps + 5)
        while True:
            k += 1
            term = term * q / (k * (k + nu))
            total += term
            if abs(term) < eps * abs(total) and k > abs(zz):
                break
        if nu == 0:
            val = total
        else:
            val = (zz / 2) ** nu * total
        return complex(val)


@dataclass(frozen=True)
class BesselZeroTable:
    """Ordered positive zeros of ``J_nu`` (equivalently of ``j_nu``)."""

    order: float
    zeros: tuple
    tol: float

    def __post_init__(self):
        z = np.asarray(self.zeros)
        if z.size and (np.any(z <= 0) or np.any(np.diff(z) <= 0)):
            raise ValueError("zeros must be positive and strictly increasing")

    def __len__(self):
        return len(self.zeros)

    def __getitem__(self, i):
        return self.zeros[i]

    def as_array(self):
        return np.asarray(self.zeros, dtype=float)


def _bisect_all(nu, a, b, fa, tol):
    """Bisect every bracket ``[a_i, b_i]`` at once until all are narrower than ``tol``."""
    a = a.copy()
    b = b.copy()
    fa = fa.copy()
    while True:
        mid = 0.5 * (a + b)
        # stop at the tolerance or when a bracket can no longer be split in floating point
        if not np.any((b - a > tol) & (mid != a) & (mid != b)):
            break
        fm = np.atleast_1d(bessel_j(nu, mid))
        same = (fm > 0) == (fa > 0)
        exact = fm == 0.0
        a = np.where(same & ~exact, mid, a)
        fa = np.where(same & ~exact, fm, fa)
        b = np.where(~same | exact, mid, b)
        a = np.where(exact, mid, a)
    return a, b


@lru_cache(maxsize=256)
def _zeros_cached(nu, count, tol):
    stride = math.pi / 4
    found = []
    x0 = nu + 1.0
    f0 = float(bessel_j(nu, x0))
    while len(found) < count:
        xs = x0 + stride * np.arange(0, 65)
        fs = np.asarray(bessel_j(nu, xs))
        fs[0] = f0
        lo, hi, flo = xs[:-1], xs[1:], fs[:-1]
        hit = (flo == 0.0) | ((flo > 0) != (fs[1:] > 0)) & (fs[1:] != 0.0)
        if hit.any():
            a, b = _bisect_all(nu, lo[hit], hi[hit], flo[hit], tol)
            z = 0.5 * (a + b)
            z = np.where(flo[hit] == 0.0, lo[hit], z)
            # Newton polish, kept only where it stays in the bracket
            for _ in range(2):
                d = np.atleast_1d(bessel_j_prime(nu, z))
                step = np.where(d != 0.0, np.atleast_1d(bessel_j(nu, z)) / np.where(d != 0.0, d, 1.0), 0.0)
                znew = z - step
                ok = (znew >= a - tol) & (znew <= b + tol)
                z = np.where(ok, znew, z)
            found.extend(float(v) for v in z)
        x0, f0 = float(xs[-1]), float(fs[-1])
        if x0 > nu + 10.0 * (count + 4) * math.pi:
            raise RuntimeError("zero scan failed to bracket the requested zeros")
    return tuple(found[:count])


def bessel_zeros(order, count, tol=1e-13):
    """First ``count`` positive zeros of ``J_order``.

    Scans with stride pi/4 from ``order + 1`` (the first zero always lies
    beyond it), bisects each sign change to width ``tol`` and polishes with
    Newton steps.
    """
    nu = _check_order(order)
    if int(count) != count or count < 1:
        raise ValueError("count must be a positive integer")
    if not tol > 0:
        raise ValueError("tol must be positive")
    return BesselZeroTable(order=nu, zeros=_zeros_cached(nu, int(count), float(tol)), tol=float(tol))


@dataclass(frozen=True)
class ExclusionRegion:
    """Disks of radius pi/6 around ``pi(k + (2nu+3)/4)`` plus an origin disk.

    The disks are mirrored onto the negative real axis, where the principal
    branch of ``J_nu`` has its zeros at ``-j_{nu,k}``.  ``origin_disk_radius``
    is configuration; no value for it is implied.
    """

    order: float
    origin_disk_radius: float
    disk_radius: float = EXCLUSION_DISK_RADIUS

    def center(self, k):
        return math.pi * (k + (2 * self.order + 3) / 4)

    def centers(self, count):
        return [self.center(k) for k in range(count)]

    def contains(self, z):
        z = complex(z)
        if abs(z) <= self.origin_disk_radius:
            return True
        for w in (z, -z):
            # nearest center index along the real axis
            k = round(w.real / math.pi - (2 * self.order + 3) / 4)
            for kk in (k - 1, k, k + 1):
                if kk >= 0 and abs(w - self.center(kk)) <= self.disk_radius:
                    return True
        return False


def lower_bound_check(order, z, C, origin_disk_radius=1.0):
    """Classify ``z`` against ``|J_nu(z)| >= C exp(|Im z|) / sqrt(|z|)``.

    Returns ``"in_exclusion"``, ``"holds"`` or ``"fails"``.
    """
    nu = _check_order(order)
    z = complex(z)
    if z == 0:
        raise ValueError("z must be nonzero")
    if not C > 0:
        raise ValueError("C must be positive")
    region = ExclusionRegion(nu, float(origin_disk_radius))
    if region.contains(z):
        return "in_exclusion"
    value = abs(bessel_j_complex(nu, z))
    bound = C * math.exp(abs(z.imag)) / math.sqrt(abs(z))
    return "holds" if value >= bound else "fails"


def calibrate_lower_bound_constant(order, x_max=40.0, origin_disk_radius=1.0, samples=4000):
    """Half the minimum of ``|J_nu(x)| sqrt(x)`` over real ``x`` outside the exclusion set."""
    nu = _check_order(order)
    region = ExclusionRegion(nu, float(origin_disk_radius))
    xs = np.linspace(origin_disk_radius, x_max, samples)
    keep = np.array([not region.contains(x) for x in xs])
    xs = xs[keep]
    vals = np.abs(np.asarray(bessel_j(nu, xs))) * np.sqrt(xs)
    return 0.5 * float(vals.min())


def asymptotic_envelope(n, m, T, samples=2048):
    """``sup_{t in [T, 2T]} max(|j_q(t)|, |j_q'(t)|) * t^((n+2m-1)/2)``, ``q = n/2 + m - 1``.

    Bounded in ``T`` by the large-argument decay of the normalized Bessel
    function; callers compare values across ``T``.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if n < 2 or m < 0:
        raise ValueError("need n >= 2 and m >= 0")
    q = n / 2 + m - 1
    t = np.linspace(T, 2 * T, samples)
    a = np.abs(np.asarray(normalized_j(q, t)))
    b = np.abs(np.asarray(normalized_j_prime(q, t)))
    return float(np.max(np.maximum(a, b) * t ** ((n + 2 * m - 1) / 2)))
