"""Blur-invariant phase correlation.

Shift convention: ``g[row, col] = f[row - dy, col - dx]``, so ``(dx, dy)`` counts
columns right and rows down.

Every supported class has centrosymmetric kernels, whose transforms are real
about the kernel origin. The phase of ``F(f)`` then moves by 0 or pi under blur,
so the squared unit phase of the centrosymmetric invariant ``I(f) = F(f) / Re F(f)``
is blur invariant and still carries a translation ramp, at twice the frequency.
The correlation peak lands at ``2 s`` and is halved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import NumericalError
from .image import Image, rotate
from .invariants import fourier_invariant, frequency_grid, lowpass_mask
from .projectors import CENTRO, BlurClass, Kind

CONFIDENCE_THRESHOLD = 1.05
EXCLUSION_RADIUS = 3
TAPER_WIDTH = 8


@dataclass
class RegistrationResult:
    """Estimated motion of ``g`` relative to ``f``.

    ``confidence`` is the correlation peak over the highest value outside a
    3-pixel exclusion zone; ``reliable`` is false below 1.05. ``peak`` is the
    correlation maximum as a fraction of the ideal (all phases agreeing).
    """

    dx: float
    dy: float
    confidence: float
    theta: float | None = None
    reliable: bool = True
    notes: list = field(default_factory=list)
    peak: float = float("nan")

    @property
    def shift(self):
        return (self.dx, self.dy)

    def to_dict(self) -> dict:
        return {
            "dx": self.dx,
            "dy": self.dy,
            "theta": self.theta,
            "confidence": self.confidence,
            "reliable": self.reliable,
            "notes": list(self.notes),
            "peak": self.peak,
        }


def _phase_power(blur_class: BlurClass) -> int:
    """1 for the delta class, 2 for classes of centrosymmetric kernels."""
    k = blur_class.kind
    if k is Kind.DELTA:
        return 1
    if k in (Kind.CENTRO, Kind.RADIAL, Kind.GAUSS):
        return 2
    if k in (Kind.NFOLD, Kind.DIHEDRAL) and blur_class.n % 2 == 0:
        return 2
    raise ValueError(f"registration is unsupported for {blur_class}: its kernels are not centrosymmetric")


def raised_cosine_taper(shape, width: int = TAPER_WIDTH) -> np.ndarray:
    """Separable window rising from 0 to 1 over ``width`` pixels at each border."""

    def ramp(n):
        w = np.ones(n)
        k = min(width, n // 2)
        if k:
            t = 0.5 * (1 - np.cos(np.pi * (np.arange(k) + 0.5) / k))
            w[:k] = t
            w[n - k :] = t[::-1]
        return w

    return np.outer(ramp(shape[0]), ramp(shape[1]))


def power_of_two_canvas(*images: Image):
    n = max(max(f.shape) for f in images)
    side = 1 << math.ceil(math.log2(2 * n))
    return (side, side)


def _parabolic(a_m, a_0, a_p) -> float:
    den = a_m - 2 * a_0 + a_p
    return 0.0 if den >= 0 else 0.5 * (a_m - a_p) / den


def _peak(surface: np.ndarray, refine: bool):
    """Signed wrapped peak location ``(row, col)``, confidence and refined offset."""
    H, W = surface.shape
    i, j = np.unravel_index(np.argmax(surface), surface.shape)
    top = surface[i, j]
    rr = (np.arange(H) - i + H // 2) % H - H // 2
    cc = (np.arange(W) - j + W // 2) % W - W // 2
    far = np.hypot(rr[:, None], cc[None, :]) > EXCLUSION_RADIUS
    second = surface[far].max() if far.any() else 0.0
    conf = float(top / second) if second > 0 else math.inf
    di = dj = 0.0
    if refine:
        di = _parabolic(surface[(i - 1) % H, j], top, surface[(i + 1) % H, j])
        dj = _parabolic(surface[i, (j - 1) % W], top, surface[i, (j + 1) % W])
    si = (i + H // 2) % H - H // 2
    sj = (j + W // 2) % W - W // 2
    return si + di, sj + dj, conf


def _prepare(f: Image, taper: int, circular: bool = False) -> Image:
    """Remove the mean, then taper the border so the frame edge does not dominate."""
    if circular:
        return f.with_samples(_windowed(f))
    a = f.samples - f.samples.mean()
    return f.with_samples(a * raised_cosine_taper(f.shape, taper) if taper else a)


def _unit_phase(f: Image, blur_class: BlurClass, canvas, eps: float, power: int):
    if power == 1:
        S = fourier_invariant(f, blur_class, canvas, eps)
    else:
        S = fourier_invariant(f, CENTRO, canvas, eps)
    v = np.zeros(canvas, dtype=np.complex128)
    v[S.mask] = S.values[S.mask] / np.abs(S.values[S.mask])
    return v, S.mask


def register_shift(
    f: Image,
    g: Image,
    blur_class: BlurClass = CENTRO,
    eps: float = 1e-3,
    lowpass_radius: float = 0.25,
    refine: bool = True,
    taper: int = TAPER_WIDTH,
    canvas=None,
    circular: bool = False,
) -> RegistrationResult:
    """Translation of ``g`` relative to ``f``, insensitive to blur from ``blur_class``.

    Both frames are compared in their own pixel grids: the shift is measured
    between origins placed at the same canvas position. ``circular`` swaps the
    rectangular border taper for a disk window, which ignores frame corners.

    Raises
    ------
    ValueError
        For classes whose kernels are not centrosymmetric.
    NumericalError
        When the shared frequency mask is empty.
    """
    power = _phase_power(blur_class)
    canvas = power_of_two_canvas(f, g) if canvas is None else tuple(canvas)
    # put both origins on the same pixel grid position so the shift is frame-relative
    f0 = Image(_prepare(f, taper, circular).samples, (0.0, 0.0))
    g0 = Image(_prepare(g, taper, circular).samples, (0.0, 0.0))
    pf, mf = _unit_phase(f0, blur_class, canvas, eps, power)
    pg, mg = _unit_phase(g0, blur_class, canvas, eps, power)
    sel = mf & mg & lowpass_mask(canvas, lowpass_radius)
    if not sel.any():
        raise NumericalError("empty frequency mask")
    Q = np.zeros(canvas, dtype=np.complex128)
    Q[sel] = (pg[sel] * np.conj(pf[sel])) ** power
    surface = np.fft.ifft2(Q).real
    di, dj, conf = _peak(surface, refine)
    peak = float(surface.max() * surface.size / sel.sum())
    res = RegistrationResult(dx=dj / power, dy=di / power, confidence=conf, peak=peak)
    if not conf >= CONFIDENCE_THRESHOLD:
        res.reliable = False
        res.notes.append("unreliable: correlation peak is not distinct")
    return res


# ---------------------------------------------------------------------------
# rotation


def _circular_window(shape) -> np.ndarray:
    H, W = shape
    y, x = np.indices(shape)
    r = np.hypot(x - (W - 1) / 2, y - (H - 1) / 2)
    R = min(H, W) / 2 - 1
    w = np.clip((R - r) / TAPER_WIDTH, 0, 1)
    return 0.5 * (1 - np.cos(np.pi * w))


def _windowed(f: Image) -> np.ndarray:
    w = _circular_window(f.shape)
    mean = (f.samples * w).sum() / w.sum()
    return (f.samples - mean) * w


def _search_width(blur_class: BlurClass) -> float:
    """Width of the angle window searched: pi for radial, 2 pi / N for even N-fold classes."""
    k = blur_class.kind
    if k is Kind.RADIAL:
        return math.pi
    if k is Kind.NFOLD and blur_class.n % 2 == 0:
        return 2 * math.pi / blur_class.n
    raise ValueError(f"rotation search needs a radial or even N-fold class, got {blur_class}")


def polar_descriptor(f: Image, blur_class: BlurClass, canvas, n_theta: int = 1024, band=(0.03, 0.125)):
    """Blur-invariant angular signature of ``log |F(f)|`` on rings in ``band`` (cycles/pixel).

    The blur spectrum's magnitude is constant on rings (radial class) or
    ``2 pi / N``-periodic (N-fold), so those angular harmonics are removed.
    Returns ``(rings, n_theta)`` real samples over ``theta in [0, 2 pi)``.
    """
    a = _windowed(f)
    F = np.fft.fftshift(np.abs(np.fft.fft2(a, s=canvas)))
    logF = np.log(F + 1e-12 * F.max())
    Hc, Wc = canvas
    n = min(Hc, Wc)
    rhos = np.arange(math.ceil(band[0] * n), math.floor(band[1] * n) + 1, dtype=np.float64)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    # frequency (u, v) with v up sits at column Wc/2 + u*Wc, row Hc/2 - v*Hc
    cols = Wc // 2 + rhos[:, None] * np.cos(theta)[None, :] * Wc / n
    rows = Hc // 2 - rhos[:, None] * np.sin(theta)[None, :] * Hc / n
    D = ndimage.map_coordinates(logF, [rows, cols], order=1, mode="wrap")
    spec = np.fft.rfft(D, axis=1)
    m = np.arange(spec.shape[1])
    if blur_class.kind is Kind.RADIAL:
        spec[:, 0] = 0
    else:
        spec[:, m % blur_class.n == 0] = 0
    return np.fft.irfft(spec, n=n_theta, axis=1)


def estimate_rotation(f: Image, g: Image, blur_class: BlurClass = None, n_theta: int = 1024):
    """Rotation angle of ``g`` relative to ``f``.

    The magnitude spectrum of a real image is centrosymmetric, so the
    descriptor correlation is ``pi``-periodic and is folded onto one half turn;
    the peak is then searched in ``(-W/2, W/2]`` with ``W`` from the class
    (``pi`` radial, ``2 pi / N`` N-fold). Returns ``(theta, confidence,
    residual)``; ``residual`` is the share of descriptor energy left after
    removing the blur-ambiguous harmonics.
    """
    from .projectors import RADIAL

    blur_class = blur_class or RADIAL
    width = _search_width(blur_class)
    canvas = power_of_two_canvas(f, g)
    Df = polar_descriptor(f, blur_class, canvas, n_theta)
    Dg = polar_descriptor(g, blur_class, canvas, n_theta)
    a = _windowed(f)
    total = float(np.sum(np.log(np.abs(np.fft.fft2(a, s=canvas)) + 1e-300) ** 2)) or 1.0
    residual = float(np.sum(Df**2)) / total * Df.size / np.prod(canvas)
    # correlation c(tau) = sum Df(theta) Dg(theta + tau); peaks where tau = rotation
    c = np.fft.irfft((np.conj(np.fft.rfft(Df, axis=1)) * np.fft.rfft(Dg, axis=1)).sum(axis=0), n=n_theta)
    per = n_theta // 2
    folded = c.reshape(2, per).sum(axis=0)
    step = math.pi / per
    k = np.arange(per)
    signed = (k + per // 2) % per - per // 2  # angle index in [-per/2, per/2)
    allowed = np.abs(signed * step) <= width / 2 + 1e-12
    if width < math.pi:
        allowed &= signed * step > -width / 2 + 1e-12
    masked = np.where(allowed, folded, -np.inf)
    i = int(np.argmax(masked))
    di = _parabolic(folded[i - 1], folded[i], folded[(i + 1) % per])
    tau = (signed[i] + di) * step
    if tau <= -math.pi / 2:
        tau += math.pi
    dist = np.minimum(np.abs(k - i), per - np.abs(k - i))
    far = allowed & (dist > max(2, per // 100))
    second = folded[far].max() if far.any() else 0.0
    conf = float(folded[i] / second) if second > 0 else math.inf
    return float(tau), conf, residual


def register_shift_rotation(
    f: Image,
    g: Image,
    blur_class: BlurClass = None,
    eps: float = 1e-3,
    lowpass_radius: float = 0.25,
    refine: bool = True,
    n_theta: int = 1024,
    min_residual: float = 1e-6,
) -> RegistrationResult:
    """Rotation and translation of ``g`` relative to ``f``.

    Model: ``g`` is ``f`` rotated counterclockwise by ``theta`` about the frame
    origin and then shifted by ``(dx, dy)``. The angle comes from the polar
    descriptor; the radial class resolves the remaining 180-degree ambiguity by
    keeping the derotation with the higher normalized shift peak. For N-fold
    classes ``theta`` is reported in ``(-pi/N, pi/N]``.
    """
    from .projectors import RADIAL

    blur_class = blur_class or RADIAL
    theta, conf_t, residual = estimate_rotation(f, g, blur_class, n_theta)
    notes = []
    if residual < min_residual:
        theta = 0.0
        notes.append("rotation undetermined: no angular structure outside the blur-invariant harmonics")
    elif not conf_t >= CONFIDENCE_THRESHOLD:
        theta = 0.0
        notes.append("rotation undetermined: angular correlation has no distinct peak")
    candidates = [theta]
    if blur_class.kind is Kind.RADIAL and not notes:
        candidates.append(theta - math.pi if theta > 0 else theta + math.pi)
    best = None
    for th in candidates:
        gd = rotate(g, -th)
        res = register_shift(f, gd, blur_class, eps, lowpass_radius, refine, circular=True)
        if best is None or res.peak > best[1].peak:
            best = (th, res)
    th, res = best
    # shift measured in the derotated frame; rotate back (rows point down)
    c, s = math.cos(th), math.sin(th)
    sx, sy = res.dx, -res.dy
    dx, dy_up = c * sx - s * sy, s * sx + c * sy
    out = RegistrationResult(
        dx=dx,
        dy=-dy_up,
        confidence=res.confidence,
        theta=th,
        reliable=res.reliable,
        notes=notes + res.notes,
        peak=res.peak,
    )
    return out
