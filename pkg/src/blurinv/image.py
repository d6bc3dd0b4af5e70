"""Discrete images with explicit continuous-coordinate origins.

An image is a grid of weighted point masses. Pixel ``(row, col)`` sits at the
continuous position ``x = col - ox``, ``y = oy - row`` (y axis pointing up), so
row 0 holds the largest ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, signal

from .errors import DataError, NumericalError

_MAX_PIXELS = 1 << 28


@dataclass(frozen=True, eq=False)
class Image:
    """Real 2-D sample grid plus the pixel position of the continuous point x=0.

    Parameters
    ----------
    samples : array_like
        ``(height, width)`` real values, row-major.
    origin : (float, float), optional
        ``(ox, oy)`` in pixel units. Defaults to the canvas center
        ``((W-1)/2, (H-1)/2)``.
    """

    samples: np.ndarray
    origin: tuple[float, float] = field(default=None)

    def __post_init__(self):
        a = np.array(self.samples, dtype=np.float64)
        if a.ndim == 1:
            a = a[None, :]
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DataError(f"image must be a non-empty 2-D array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DataError("image samples must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)
        if self.origin is None:
            origin = ((a.shape[1] - 1) / 2.0, (a.shape[0] - 1) / 2.0)
        else:
            origin = (float(self.origin[0]), float(self.origin[1]))
        if not all(math.isfinite(v) for v in origin):
            raise DataError("origin must be finite")
        object.__setattr__(self, "origin", origin)

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    def coordinates(self):
        """Continuous ``(x, y)`` coordinate vectors of columns and rows."""
        ox, oy = self.origin
        x = np.arange(self.width, dtype=np.float64) - ox
        y = oy - np.arange(self.height, dtype=np.float64)
        return x, y

    def mass(self) -> float:
        return float(math.fsum(self.samples.ravel()))

    def with_samples(self, samples) -> "Image":
        return Image(samples, self.origin)

    def pad(self, top=0, bottom=0, left=0, right=0) -> "Image":
        """Zero-pad the canvas; continuous positions of existing pixels are kept."""
        a = np.pad(self.samples, ((top, bottom), (left, right)))
        ox, oy = self.origin
        return Image(a, (ox + left, oy + top))

    def is_centered(self) -> bool:
        ox, oy = self.origin
        return 2 * ox == self.width - 1 and 2 * oy == self.height - 1

    def centered(self) -> "Image":
        """Zero-pad so that the origin sits at the canvas center.

        Requires ``2*ox`` and ``2*oy`` to be integers (origin on the pixel or
        half-pixel lattice), otherwise no symmetric canvas exists.
        """
        ox, oy = self.origin
        if not (float(2 * ox).is_integer() and float(2 * oy).is_integer()):
            raise ValueError(f"origin {self.origin} is not on the half-pixel lattice")
        dx = int(2 * ox) - (self.width - 1)
        dy = int(2 * oy) - (self.height - 1)
        return self.pad(top=max(0, -dy), bottom=max(0, dy), left=max(0, -dx), right=max(0, dx))

    def square_centered(self) -> "Image":
        """Centered canvas padded to a square, so 90-degree rotations are grid-exact."""
        c = self.centered()
        n = max(c.width, c.height)
        if (n - c.width) % 2 or (n - c.height) % 2:
            raise ValueError("origin parities differ in x and y; no centered square canvas exists")
        px = (n - c.width) // 2
        py = (n - c.height) // 2
        return c.pad(top=py, bottom=py, left=px, right=px)

    def __repr__(self):
        return f"Image({self.width}x{self.height}, origin={self.origin})"


def delta() -> Image:
    """Unit impulse: 1x1 image with sample 1 at the origin."""
    return Image(np.ones((1, 1)), (0.0, 0.0))


def convolve_full(f: Image, h: Image) -> Image:
    """Zero-padded full convolution; origins add so continuous coordinates stay consistent."""
    H = f.height + h.height - 1
    W = f.width + h.width - 1
    if H * W > _MAX_PIXELS:
        raise DataError(f"convolution output {W}x{H} exceeds the size limit")
    out = signal.convolve(f.samples, h.samples, mode="full")
    return Image(out, (f.origin[0] + h.origin[0], f.origin[1] + h.origin[1]))


def measured_snr_db(clean: Image, noisy: Image) -> float:
    """Empirical SNR in dB: ``10 log10(var(clean) / var(noisy - clean))``."""
    n = noisy.samples - clean.samples
    return 10.0 * math.log10(np.var(clean.samples) / np.var(n))


def add_white_gaussian_noise(f: Image, snr_db: float | None, seed=None) -> Image:
    """Add i.i.d. zero-mean Gaussian noise at the requested SNR.

    The noise variance is ``var(f) / 10**(snr_db/10)``. ``snr_db`` of ``None``
    or ``inf`` returns ``f`` unchanged. ``seed`` may be an int or a
    ``numpy.random.Generator`` owned by the caller.
    """
    if snr_db is None or (math.isinf(snr_db) and snr_db > 0):
        return f
    var = float(np.var(f.samples))
    if var == 0.0:
        raise NumericalError("cannot set SNR on a constant image (variance 0)")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sigma = math.sqrt(var / 10.0 ** (snr_db / 10.0))
    return f.with_samples(f.samples + rng.normal(0.0, sigma, size=f.shape))


def rotate(f: Image, angle: float, order: int = 1) -> Image:
    """Rotate counterclockwise (y up) about the origin, keeping the canvas.

    Output pixel at continuous ``p`` takes the input value at ``R(-angle) p``,
    interpolated bilinearly by default; samples falling outside are zero.
    """
    x, y = f.coordinates()
    X, Y = np.meshgrid(x, y)
    c, s = math.cos(angle), math.sin(angle)
    xs = c * X + s * Y
    ys = -s * X + c * Y
    cols = xs + f.origin[0]
    rows = f.origin[1] - ys
    out = ndimage.map_coordinates(f.samples, [rows, cols], order=order, mode="constant", cval=0.0)
    return f.with_samples(out)


def embed(f: Image, canvas: tuple[int, int]) -> np.ndarray:
    """Zero-embed the samples into the top-left corner of a ``(H, W)`` canvas."""
    Hc, Wc = canvas
    if f.height > Hc or f.width > Wc:
        raise ValueError(f"image {f.width}x{f.height} does not fit canvas {Wc}x{Hc}")
    a = np.zeros((Hc, Wc))
    a[: f.height, : f.width] = f.samples
    return a
