"""Blur invariants: moment-domain coefficients C_p and the Fourier-domain ratio I(f).

The moment invariants are the coefficients of the series quotient of the
moment-generating functions of ``f`` and ``Pf``. In increasing order,

    m0(Pf) C_p = m_p(f) - sum_{0 < k <= p} C(p, k) m_k(Pf) C_{p-k}

with the multi-index binomial ``C(p, k) = C(p1, k1) C(p2, k2)``. For classes
with a separating basis ``m_k(Pf)`` is ``m_k(f)`` on the index set ``D`` and zero
off it, which gives the familiar ``k in D`` sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy import special

from .errors import NumericalError
from .image import Image, embed
from .moments import (
    COMPLEX,
    GEOMETRIC,
    MomentTable,
    gaussian_moments,
    indices,
    moments,
    order_mask,
    transform_geometric,
)
from .projectors import (
    BlurClass,
    Kind,
    _rotation_frame,
    gaussian_fit,
    index_set,
    project,
    projected_moments,
)

__all__ = [
    "InvariantVector",
    "InvariantSpectrum",
    "moment_invariants",
    "invariants_from_moments",
    "recurrence",
    "trivial_mask",
    "gaussian_moments",
    "fourier_invariant",
    "invariant_distance",
    "spectrum_distance",
    "factorial_weights",
    "dtft",
    "spectral_projection",
]

M00_REL_TOL = 1e-9
FORCED_TOL = 1e-10


@lru_cache(maxsize=None)
def _recurrence_plan(r: int):
    """For each ``p`` (by order) the terms ``(k, p-k, C(p,k))`` with ``0 < k <= p``."""
    plan = []
    for p in indices(r)[1:]:
        ks, rest, coef = [], [], []
        for k in indices(p[0] + p[1]):
            if k == (0, 0) or k[0] > p[0] or k[1] > p[1]:
                continue
            ks.append(k)
            rest.append((p[0] - k[0], p[1] - k[1]))
            coef.append(comb(p[0], k[0]) * comb(p[1], k[1]))
        plan.append((p, tuple(np.array(ks).T), tuple(np.array(rest).T), np.array(coef, dtype=np.float64)))
    return plan


def recurrence(m: np.ndarray, mp: np.ndarray, r: int) -> np.ndarray:
    """Solve ``m = C * mp`` (series product) for ``C``, vectorized over leading axes.

    ``m`` and ``mp`` hold order-``r`` tables of ``f`` and ``Pf`` in the last two axes.
    """
    m = np.asarray(m)
    mp = np.asarray(mp)
    dtype = np.result_type(m, mp, np.float64)
    C = np.zeros(np.broadcast_shapes(m.shape, mp.shape), dtype=dtype)
    m0 = mp[..., 0, 0]
    C[..., 0, 0] = 1.0
    for p, ks, rest, coef in _recurrence_plan(r):
        acc = (coef * mp[..., ks[0], ks[1]] * C[..., rest[0], rest[1]]).sum(axis=-1)
        C[..., p[0], p[1]] = (m[..., p[0], p[1]] - acc) / m0
    return C


def trivial_mask(blur_class: BlurClass, basis: str, r: int) -> np.ndarray:
    """Entries whose value is forced: ``C_00``, and ``D`` when it is difference-closed.

    Dihedral (complex basis) forces ``C_pp = 0`` and the Gaussian class forces
    every entry of order 1 and 2 to zero.
    """
    t = np.zeros((r + 1, r + 1), dtype=bool)
    t[0, 0] = True
    if blur_class.kind is Kind.GAUSS:
        # Pf matches mass, centroid and covariance, so orders 1 and 2 cancel
        p, q = np.indices(t.shape)
        t |= p + q <= 2
    elif blur_class.kind is Kind.DIHEDRAL and basis == COMPLEX:
        # the projection keeps every c_pp, and these cancel in the quotient
        t |= np.eye(r + 1, dtype=bool)
    elif blur_class.separating_basis is not None:
        D = index_set(blur_class, basis)
        if D.difference_closed:
            t |= D.mask(r)
    return t & order_mask(r)


def _working_moments(f: Image, blur_class: BlurClass, basis: str, r: int, L: float) -> np.ndarray:
    m = moments(f, r, L, basis).values
    if blur_class.kind is Kind.DIRECTIONAL and blur_class.beta != 0.0:
        m = transform_geometric(m, _rotation_frame(blur_class.beta), r)
    return m


def _default_basis(blur_class: BlurClass, basis: str | None) -> str:
    basis = basis or blur_class.working_basis
    if blur_class.separating_basis is not None:
        index_set(blur_class, basis)  # validates the basis
    elif blur_class.kind is Kind.GAUSS and basis != GEOMETRIC:
        raise ValueError("Gaussian invariants use geometric moments")
    return basis


def invariants_from_moments(m: np.ndarray, blur_class: BlurClass, basis: str, r: int, L: float) -> np.ndarray:
    """Invariant tables from moment tables (any leading batch shape).

    Entries whose ``m00`` vanishes come out as ``nan``.
    """
    mp = projected_moments(m, blur_class, basis, r, L)
    with np.errstate(divide="ignore", invalid="ignore"):
        return recurrence(m, mp, r)


@dataclass(frozen=True, eq=False)
class InvariantVector:
    """Coefficients ``C_pq`` up to order ``r`` for one image and one blur class.

    ``trivial`` marks forced entries (``C_00 = 1`` and zeros on a
    difference-closed index set); distances skip them.
    """

    blur_class: BlurClass
    basis: str
    r: int
    L: float
    m00: float
    values: np.ndarray
    trivial: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128 if self.basis == COMPLEX else np.float64)
        v[~order_mask(self.r)] = 0
        v.setflags(write=False)
        t = np.array(self.trivial, dtype=bool)
        t.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "trivial", t)

    def __getitem__(self, pq):
        p, q = pq
        if p < 0 or q < 0 or p + q > self.r:
            raise KeyError(pq)
        return self.values[p, q]

    @property
    def config(self):
        return (str(self.blur_class), self.basis, self.r, self.L)

    def nontrivial(self) -> np.ndarray:
        """Boolean mask of entries used by distances."""
        return order_mask(self.r) & ~self.trivial

    def features(self) -> np.ndarray:
        """Real feature vector: nontrivial entries, real and imaginary parts split in complex basis."""
        v = self.values[self.nontrivial()]
        if self.basis == COMPLEX:
            return np.concatenate([v.real, v.imag])
        return v

    def to_dict(self) -> dict:
        entries = []
        for p, q in indices(self.r):
            v = complex(self.values[p, q])
            entries.append({"p": p, "q": q, "re": v.real, "im": v.imag, "trivial": bool(self.trivial[p, q])})
        return {
            "class": str(self.blur_class),
            "basis": self.basis,
            "r": self.r,
            "L": self.L,
            "m00": self.m00,
            "entries": entries,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InvariantVector":
        r = int(d["r"])
        v = np.zeros((r + 1, r + 1), dtype=np.complex128)
        t = np.zeros((r + 1, r + 1), dtype=bool)
        seen = set()
        for e in d["entries"]:
            v[e["p"], e["q"]] = complex(e["re"], e["im"])
            t[e["p"], e["q"]] = bool(e["trivial"])
            seen.add((e["p"], e["q"]))
        if seen != set(indices(r)):
            raise ValueError("invariant vector is incomplete")
        if d["basis"] == GEOMETRIC:
            v = v.real
        return cls(BlurClass.parse(d["class"]), d["basis"], r, float(d["L"]), float(d["m00"]), v, t)


def moment_invariants(f: Image, blur_class: BlurClass, r: int, L: float, basis: str | None = None) -> InvariantVector:
    """Moment blur invariants ``C_p`` of ``f`` up to order ``r``.

    Parameters
    ----------
    f : Image
    blur_class : BlurClass
    r : int
        Maximum order.
    L : float
        Reference length in pixels, shared by every image that is compared.
    basis : str, optional
        ``"geometric"`` or ``"complex"``; defaults to the class's working basis.
        Directional invariants use geometric moments in the beta-rotated frame.

    Raises
    ------
    NumericalError
        When ``m00`` vanishes (the first-nonzero-moment fallback is not
        implemented) or a forced entry fails to come out as zero.
    """
    basis = _default_basis(blur_class, basis)
    m = _working_moments(f, blur_class, basis, r, L)
    m00 = m[0, 0].real
    l1 = float(np.abs(f.samples).sum())
    if not abs(m00) > M00_REL_TOL * l1:
        raise NumericalError(
            "m00 vanishes; the recurrence based on the first nonzero moment is not implemented"
        )
    C = recurrence(m, projected_moments(m, blur_class, basis, r, L), r)
    trivial = trivial_mask(blur_class, basis, r)
    expected = np.zeros(C.shape)
    expected[0, 0] = 1.0
    forced = np.abs(C - expected)[trivial]
    if forced.max() > FORCED_TOL * max(1.0, float(np.abs(C).max())):
        raise NumericalError(f"forced invariant entry deviates by {forced.max():.3g}")
    return InvariantVector(blur_class, basis, r, float(L), float(m00), C, trivial)


def factorial_weights(r: int) -> np.ndarray:
    p, q = np.indices((r + 1, r + 1))
    w = np.array([[1.0 / math.factorial(i + j) for j in range(r + 1)] for i in range(r + 1)])
    return np.where(p + q <= r, w, 0.0)


def invariant_distance(a: InvariantVector, b: InvariantVector, weights=None) -> float:
    """Weighted distance ``sqrt(sum w_p |C_p^a - C_p^b|^2)`` over nontrivial entries.

    Default weights are ``1 / order!``.
    """
    if a.config != b.config:
        raise ValueError(f"mismatched invariant configurations {a.config} vs {b.config}")
    w = factorial_weights(a.r) if weights is None else np.asarray(weights, dtype=np.float64)
    sel = a.nontrivial() & b.nontrivial()
    d = np.abs(a.values - b.values) ** 2 * w
    return float(math.sqrt(math.fsum(d[sel])))


# ---------------------------------------------------------------------------
# Fourier domain


def dtft(f: Image, u, v) -> np.ndarray:
    """Continuous-frequency transform ``sum f(x, y) exp(-2 pi i (u x + v y))``, by direct summation."""
    x, y = f.coordinates()
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    ex = np.exp(-2j * np.pi * u[..., None] * x)  # (..., W)
    ey = np.exp(-2j * np.pi * v[..., None] * y)  # (..., H)
    return np.einsum("...w,hw,...h->...", ex, f.samples, ey)


def _phase_referenced_fft(f: Image, canvas) -> np.ndarray:
    """DFT of ``f`` on ``canvas`` evaluated as the continuous transform at lattice frequencies."""
    Hc, Wc = canvas
    F = np.fft.fft2(embed(f, canvas))
    k = np.fft.fftfreq(Wc) * Wc
    l = np.fft.fftfreq(Hc) * Hc
    ox, oy = f.origin
    return F * np.exp(2j * np.pi * (l[:, None] * oy / Hc + k[None, :] * ox / Wc))


def frequency_grid(canvas):
    """Continuous frequencies ``(u, v)`` in cycles per pixel, y axis up, for a DFT canvas."""
    Hc, Wc = canvas
    u = np.fft.fftfreq(Wc)
    v = -np.fft.fftfreq(Hc)
    return np.meshgrid(u, v)


@dataclass(frozen=True, eq=False)
class InvariantSpectrum:
    """``I(f)(u) = F(f)(u) / F(Pf)(u)`` on a DFT lattice.

    Transforms are phase-referenced to the image origin, so spectra of images on
    different canvases of the same size are directly comparable. ``values`` is
    zero where ``mask`` is false.
    """

    values: np.ndarray
    mask: np.ndarray
    eps: float
    canvas: tuple[int, int]
    origin: tuple[float, float] = (0.0, 0.0)

    def frequencies(self):
        return frequency_grid(self.canvas)


def _group_matrices(blur_class: BlurClass):
    """Linear maps ``A`` with ``F(Pf)(u) = mean_A F(f)(A u)`` for rotation and reflection classes."""
    def rot(t):
        return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])

    k = blur_class.kind
    n = 2 if k is Kind.CENTRO else blur_class.n
    mats = [rot(2 * math.pi * j / n) for j in range(n)]
    if k is Kind.DIHEDRAL:
        a = 2 * blur_class.alpha
        flip = np.array([[math.cos(a), math.sin(a)], [math.sin(a), -math.cos(a)]])
        mats += [m @ flip for m in mats]
    elif k is Kind.EVEN1D:
        mats = [np.eye(2), np.diag([-1.0, 1.0])]
    return mats


def spectral_projection(f: Image, blur_class: BlurClass, U, V) -> np.ndarray:
    """``F(Pf)`` at frequencies ``(U, V)`` (cycles per pixel), from the continuous-model projector.

    Each class acts on the spectrum in closed form: group averages of ``F(f)`` at
    transformed frequencies, a Bessel ring sum for the radial class, the
    restriction to the blur direction for directional classes and the Gaussian
    transform for the Gaussian class. Frequencies off the lattice are evaluated
    by direct summation.
    """
    U = np.asarray(U, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    k = blur_class.kind
    if k is Kind.IDENTITY:
        return _dtft_chunked(f, U, V)
    if k is Kind.DELTA:
        return np.full(U.shape, f.samples.sum(), dtype=np.complex128)
    if k is Kind.RADIAL:
        x, y = f.coordinates()
        rr = np.hypot(x[None, :], y[:, None]).ravel()
        rho, inv = np.unique(np.hypot(U, V).ravel(), return_inverse=True)
        vals = special.j0(2 * np.pi * rho[:, None] * rr[None, :]) @ f.samples.ravel()
        return vals[inv].reshape(U.shape).astype(np.complex128)
    if k is Kind.DIRECTIONAL:
        cb, sb = math.cos(blur_class.beta), math.sin(blur_class.beta)
        t = U * cb + V * sb
        return _dtft_chunked(f, t * cb, t * sb)
    if k is Kind.GAUSS:
        a, (cx, cy), S = gaussian_fit(moments(f, 2, 1.0))
        q = S[0, 0] * U * U + 2 * S[0, 1] * U * V + S[1, 1] * V * V
        return a * np.exp(-2j * np.pi * (U * cx + V * cy) - 2 * np.pi**2 * q)
    acc = np.zeros(U.shape, dtype=np.complex128)
    mats = _group_matrices(blur_class)
    for A in mats:
        acc += _dtft_chunked(f, A[0, 0] * U + A[0, 1] * V, A[1, 0] * U + A[1, 1] * V)
    return acc / len(mats)


def invariant_at(f: Image, blur_class: BlurClass, u, v) -> np.ndarray:
    """``I(f)`` at arbitrary frequencies, without masking."""
    return _dtft_chunked(f, np.asarray(u, float), np.asarray(v, float)) / spectral_projection(f, blur_class, u, v)


def _dtft_chunked(f: Image, u: np.ndarray, v: np.ndarray, chunk: int = 1 << 22) -> np.ndarray:
    out = np.empty(u.shape, dtype=np.complex128)
    fu, fv, fo = u.ravel(), v.ravel(), out.reshape(-1)
    step = max(1, chunk // (f.width + f.height))
    for i in range(0, fu.size, step):
        fo[i : i + step] = dtft(f, fu[i : i + step], fv[i : i + step])
    return out


def fourier_invariant(f: Image, blur_class: BlurClass, canvas=None, eps: float = 1e-3) -> InvariantSpectrum:
    """Fourier blur invariant ``F(f) / F(Pf)`` of ``f`` on ``canvas`` (default: the image size).

    Grid-exact classes transform the discrete projection ``project(f)`` when it
    fits on the canvas; other classes use :func:`spectral_projection`.
    Frequencies where ``|F(Pf)| <= eps * max |F(Pf)|`` are masked out.

    Raises
    ------
    NumericalError
        If the projection vanishes.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    canvas = f.shape if canvas is None else tuple(canvas)
    if f.height > canvas[0] or f.width > canvas[1]:
        raise ValueError(f"canvas {canvas} smaller than the image")
    Ff = _phase_referenced_fft(f, canvas)
    Fp = None
    if blur_class.grid_exact:
        try:
            Pf = project(f, blur_class)
        except ValueError:
            Pf = None
        if Pf is not None and Pf.height <= canvas[0] and Pf.width <= canvas[1]:
            Fp = _phase_referenced_fft(Pf, canvas)
    if Fp is None:
        Fp = spectral_projection(f, blur_class, *frequency_grid(canvas))
    amp = np.abs(Fp)
    top = amp.max()
    if not top > 1e-12 * np.abs(f.samples).sum():
        raise NumericalError("projection vanishes: f lies in the complement of the blur space")
    mask = amp > eps * top
    vals = np.zeros(canvas, dtype=np.complex128)
    vals[mask] = Ff[mask] / Fp[mask]
    return InvariantSpectrum(vals, mask, float(eps), canvas, f.origin)


def lowpass_mask(canvas, radius: float) -> np.ndarray:
    """Frequencies within ``radius * Nyquist`` (Nyquist = 0.5 cycles/pixel)."""
    U, V = frequency_grid(canvas)
    return np.hypot(U, V) <= radius * 0.5


def spectrum_distance(a: InvariantSpectrum, b: InvariantSpectrum, lowpass_radius: float = 0.25) -> float:
    """RMS of ``|I_a - I_b|`` over the shared mask below ``lowpass_radius`` times Nyquist."""
    if a.canvas != b.canvas:
        raise ValueError(f"spectra on different canvases {a.canvas} vs {b.canvas}")
    sel = a.mask & b.mask & lowpass_mask(a.canvas, lowpass_radius)
    if not sel.any():
        raise NumericalError("empty intersection mask")
    d = np.abs(a.values[sel] - b.values[sel]) ** 2
    return float(math.sqrt(math.fsum(d) / d.size))
