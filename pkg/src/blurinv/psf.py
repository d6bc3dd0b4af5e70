"""Point-spread-function generators.

All kernels are returned on odd, centered canvases (origin at the middle pixel),
are nonnegative and carry unit mass. Disk and polygon apertures are rasterized
by pixel-area coverage with 16x16 supersampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .image import Image

SUPERSAMPLE = 16
MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Psf(Image):
    """Brightness-preserving blur kernel: nonnegative samples summing to one."""

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.samples < 0):
            raise DataError("PSF samples must be nonnegative")
        if abs(self.samples.sum() - 1.0) > MASS_TOL:
            raise DataError(f"PSF mass must be 1, got {self.samples.sum()!r}")


def _normalized(a: np.ndarray) -> Psf:
    a = np.asarray(a, dtype=np.float64)
    a = a / a.sum()
    return Psf(a)


def _subsample_offsets(n=SUPERSAMPLE):
    return (np.arange(n) + 0.5) / n - 0.5


def _coverage(half: int, inside) -> np.ndarray:
    """Fraction of each pixel of a ``(2*half+1)^2`` grid for which ``inside(x, y)`` holds."""
    k = np.arange(-half, half + 1, dtype=np.float64)
    s = _subsample_offsets()
    xs = (k[:, None] + s[None, :]).ravel()  # column positions, subsample-major
    ys = xs[::-1].copy()  # y up: row 0 is the top
    X, Y = np.meshgrid(xs, ys)
    hit = inside(X, Y).astype(np.float64)
    n = 2 * half + 1
    return hit.reshape(n, SUPERSAMPLE, n, SUPERSAMPLE).mean(axis=(1, 3))


def _trim(a: np.ndarray) -> np.ndarray:
    """Strip all-zero border rings symmetrically, keeping the center pixel."""
    while a.shape[0] > 1 and not a[0].any() and not a[-1].any() and not a[:, 0].any() and not a[:, -1].any():
        a = a[1:-1, 1:-1]
    return a


def psf_disk(radius: float) -> Psf:
    """Uniform out-of-focus disk of the given radius (pixels)."""
    if not radius > 0:
        raise DataError(f"disk radius must be positive, got {radius}")
    half = max(0, math.ceil(radius + 0.5) - 1)
    r2 = radius * radius
    a = _coverage(half, lambda x, y: x * x + y * y <= r2)
    if a.sum() == 0:
        a = np.ones((1, 1))
    return _normalized(_trim(a))


def psf_polygon(n: int, circumradius: float, rotation: float = 0.0) -> Psf:
    """Uniform regular ``n``-gon aperture.

    After rasterization the kernel is averaged over the grid-exact subgroup of its
    rotations (90 degrees when ``4 | n``, 180 degrees when ``2 | n``), which removes
    rasterization asymmetry that would otherwise break those symmetries.
    """
    if n < 3:
        raise DataError(f"polygon needs n >= 3, got {n}")
    if not circumradius > 0:
        raise DataError(f"circumradius must be positive, got {circumradius}")
    ang = rotation + 2 * np.pi * np.arange(n) / n
    vx = circumradius * np.cos(ang)
    vy = circumradius * np.sin(ang)

    def inside(x, y):
        ok = np.ones(x.shape, dtype=bool)
        for k in range(n):
            ex, ey = vx[(k + 1) % n] - vx[k], vy[(k + 1) % n] - vy[k]
            ok &= ex * (y - vy[k]) - ey * (x - vx[k]) >= 0
        return ok

    half = max(0, math.ceil(circumradius + 0.5) - 1)
    a = _coverage(half, inside)
    if a.sum() == 0:
        a = np.ones((1, 1))
    if n % 4 == 0:
        a = (a + np.rot90(a, 1) + np.rot90(a, 2) + np.rot90(a, 3)) / 4
    elif n % 2 == 0:
        a = (a + a[::-1, ::-1]) / 2
    return _normalized(_trim(a))


def psf_gaussian(sigma_x: float, sigma_y: float, rho: float = 0.0, half_size: int | None = None) -> Psf:
    """Sampled anisotropic Gaussian with correlation ``rho`` (y axis up)."""
    if not (sigma_x > 0 and sigma_y > 0) or not -1 < rho < 1:
        raise DataError("Gaussian PSF needs positive sigmas and |rho| < 1")
    if half_size is None:
        half_size = math.ceil(4 * max(sigma_x, sigma_y))
    if half_size < 0:
        raise DataError("half_size must be nonnegative")
    cov = np.array([[sigma_x**2, rho * sigma_x * sigma_y], [rho * sigma_x * sigma_y, sigma_y**2]])
    inv = np.linalg.inv(cov)
    k = np.arange(-half_size, half_size + 1, dtype=np.float64)
    X, Y = np.meshgrid(k, k[::-1])
    q = inv[0, 0] * X * X + 2 * inv[0, 1] * X * Y + inv[1, 1] * Y * Y
    return _normalized(np.exp(-0.5 * q))


def psf_motion(length: float, angle: float = 0.0) -> Psf:
    """Uniform linear-motion segment of the given length through the origin.

    The segment is sampled densely, splatted bilinearly and made exactly
    centrosymmetric; at ``angle == 0`` all mass lies on the origin row.
    """
    if not length > 0:
        raise DataError(f"motion length must be positive, got {length}")
    half = math.ceil(length / 2) + 1
    n = 2 * math.ceil(8 * length) + 1
    t = np.linspace(-length / 2, length / 2, n)
    px = t * math.cos(angle)
    py = t * math.sin(angle)
    if angle == 0.0:
        py = np.zeros_like(t)
    size = 2 * half + 1
    a = np.zeros((size, size))
    cols = px + half
    rows = half - py
    c0 = np.floor(cols).astype(int)
    r0 = np.floor(rows).astype(int)
    fc = cols - c0
    fr = rows - r0
    for dr, wr in ((0, 1 - fr), (1, fr)):
        for dc, wc in ((0, 1 - fc), (1, fc)):
            np.add.at(a, (r0 + dr, c0 + dc), wr * wc)
    a = (a + a[::-1, ::-1]) / 2
    return _normalized(_trim(a))


def psf_random_centrosymmetric(half_size: int, seed=None) -> Psf:
    """Random nonnegative kernel ``s(x) + s(-x)`` on a ``(2*half_size+1)^2`` grid."""
    if half_size < 0:
        raise DataError("half_size must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    s = rng.random((2 * half_size + 1, 2 * half_size + 1))
    return _normalized(s + s[::-1, ::-1])
