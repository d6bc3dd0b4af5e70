"""Geometric and complex moments with reference-length normalization.

Moments are computed about an image's origin with coordinates divided by a
reference length ``L``:

    m_pq = sum f(x, y) (x/L)^p (y/L)^q
    c_pq = sum f(x, y) ((x + iy)/L)^p ((x - iy)/L)^q

Tables are stored as ``(r+1, r+1)`` arrays indexed ``[p, q]``; entries with
``p + q > r`` are zero and ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import NumericalError
from .image import Image

GEOMETRIC = "geometric"
COMPLEX = "complex"
BASES = (GEOMETRIC, COMPLEX)


def indices(r: int):
    """All multi-indices ``(p, q)`` with ``p + q <= r``, ordered by total order."""
    return [(p, order - p) for order in range(r + 1) for p in range(order, -1, -1)]


def order_mask(r: int) -> np.ndarray:
    p, q = np.indices((r + 1, r + 1))
    return p + q <= r


def ksum(terms: np.ndarray) -> np.ndarray:
    """Neumaier-compensated sum over axis 0, vectorized over the remaining axes."""
    terms = np.asarray(terms)
    s = np.zeros(terms.shape[1:], dtype=terms.dtype)
    c = np.zeros_like(s)
    for t in terms:
        tot = s + t
        big = np.abs(s) >= np.abs(t)
        c += np.where(big, (s - tot) + t, (t - tot) + s)
        s = tot
    return s + c


@dataclass(frozen=True, eq=False)
class MomentTable:
    """Complete table of moments up to order ``r`` in one basis."""

    basis: str
    r: int
    L: float
    origin: tuple[float, float]
    values: np.ndarray

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        v = np.array(self.values, dtype=np.complex128 if self.basis == COMPLEX else np.float64)
        if v.shape != (self.r + 1, self.r + 1):
            raise ValueError(f"values must have shape {(self.r + 1,) * 2}, got {v.shape}")
        v[~order_mask(self.r)] = 0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, pq):
        p, q = pq
        if p < 0 or q < 0 or p + q > self.r:
            raise KeyError(pq)
        return self.values[p, q]

    def to_dict(self) -> dict:
        entries = []
        for p, q in indices(self.r):
            v = complex(self.values[p, q])
            entries.append({"p": p, "q": q, "re": v.real, "im": v.imag})
        return {"basis": self.basis, "r": self.r, "L": self.L, "origin": list(self.origin), "entries": entries}

    @classmethod
    def from_dict(cls, d: dict) -> "MomentTable":
        r = int(d["r"])
        basis = d["basis"]
        v = np.zeros((r + 1, r + 1), dtype=np.complex128)
        seen = set()
        for e in d["entries"]:
            v[e["p"], e["q"]] = complex(e["re"], e["im"])
            seen.add((e["p"], e["q"]))
        if seen != set(indices(r)):
            raise ValueError("moment table is incomplete")
        if basis == GEOMETRIC:
            v = v.real
        return cls(basis, r, float(d["L"]), tuple(d["origin"]), v)


def _check(r, L):
    if r < 0:
        raise ValueError(f"order must be nonnegative, got {r}")
    if not L > 0:
        raise ValueError(f"reference length must be positive, got {L}")


def geometric_moments(f: Image, r: int, L: float) -> MomentTable:
    """Geometric moments ``m_pq`` about the image origin, y axis up."""
    _check(r, L)
    x, y = f.coordinates()
    X = np.vander(x / L, r + 1, increasing=True)  # (W, r+1)
    Y = np.vander(y / L, r + 1, increasing=True)  # (H, r+1)
    rows = f.samples @ X  # per-row partial sums, (H, r+1)
    m = ksum(rows[:, :, None] * Y[:, None, :])
    return MomentTable(GEOMETRIC, r, float(L), f.origin, m)


def complex_moments(f: Image, r: int, L: float) -> MomentTable:
    """Complex moments ``c_pq`` computed by direct summation."""
    _check(r, L)
    x, y = f.coordinates()
    z = (x[None, :] + 1j * y[:, None]) / L
    zp = z[..., None] ** np.arange(r + 1)
    zq = np.conj(zp)
    rows = np.einsum("hw,hwp,hwq->hpq", f.samples, zp, zq)
    c = ksum(rows)
    return MomentTable(COMPLEX, r, float(L), f.origin, c)


@lru_cache(maxsize=None)
def _geo_to_complex_matrix(r: int) -> np.ndarray:
    """``T[p, q, a, b]`` with ``c_pq = sum T m_ab``, from expanding (x+iy)^p (x-iy)^q."""
    T = np.zeros((r + 1,) * 4, dtype=np.complex128)
    for p, q in indices(r):
        for k in range(p + 1):
            for j in range(q + 1):
                coef = comb(p, k) * comb(q, j) * (1j) ** (p - k) * (-1j) ** (q - j)
                T[p, q, k + j, p - k + q - j] += coef
    T.setflags(write=False)
    return T


@lru_cache(maxsize=None)
def _complex_to_geo_matrix(r: int) -> np.ndarray:
    """Inverse map from x = (z + zb)/2, y = (z - zb)/(2i)."""
    T = np.zeros((r + 1,) * 4, dtype=np.complex128)
    for p, q in indices(r):
        scale = 1.0 / (2**p * (2j) ** q)
        for k in range(p + 1):
            for j in range(q + 1):
                coef = comb(p, k) * comb(q, j) * (-1) ** (q - j) * scale
                T[p, q, k + j, p - k + q - j] += coef
    T.setflags(write=False)
    return T


def geo_to_complex(m: np.ndarray, r: int) -> np.ndarray:
    """Change basis on the last two axes of an array of geometric tables."""
    return np.tensordot(m, _geo_to_complex_matrix(r), axes=([-2, -1], [2, 3]))


def complex_to_geo(c: np.ndarray, r: int) -> np.ndarray:
    """Inverse of :func:`geo_to_complex`; returns a complex array (real for real images)."""
    return np.tensordot(c, _complex_to_geo_matrix(r), axes=([-2, -1], [2, 3]))


def linear_transform_matrix(A, r: int) -> np.ndarray:
    """``T`` mapping geometric moments to moments in coordinates ``(x', y') = A (x, y)``."""
    (a, b), (c, d) = np.asarray(A, dtype=np.float64)
    T = np.zeros((r + 1,) * 4)
    for p, q in indices(r):
        for k in range(p + 1):
            for j in range(q + 1):
                coef = comb(p, k) * comb(q, j) * a**k * b ** (p - k) * c**j * d ** (q - j)
                T[p, q, k + j, p - k + q - j] += coef
    return T


def transform_geometric(m: np.ndarray, A, r: int) -> np.ndarray:
    return np.tensordot(m, linear_transform_matrix(A, r), axes=([-2, -1], [2, 3]))


def transition(table: MomentTable, target: str) -> MomentTable:
    """Exact change of polynomial basis between geometric and complex moments."""
    if target not in BASES:
        raise ValueError(f"unsupported basis pair {table.basis} -> {target}")
    if table.basis == target:
        return table
    if table.basis == GEOMETRIC:
        return MomentTable(COMPLEX, table.r, table.L, table.origin, geo_to_complex(table.values, table.r))
    g = complex_to_geo(table.values, table.r)
    return MomentTable(GEOMETRIC, table.r, table.L, table.origin, g.real)


def moments(f: Image, r: int, L: float, basis: str = GEOMETRIC) -> MomentTable:
    if basis == GEOMETRIC:
        return geometric_moments(f, r, L)
    if basis == COMPLEX:
        return complex_moments(f, r, L)
    raise ValueError(f"unknown basis {basis!r}")


def window_moments(scene: np.ndarray, shape: tuple[int, int], r: int, L: float) -> np.ndarray:
    """Geometric moments of every ``shape`` window of ``scene`` about the window center.

    Returns an array ``(ny, nx, r+1, r+1)`` where ``[i, j]`` is the window whose
    top-left pixel is ``(row i, col j)``. Separable sliding sums, no compensation.
    """
    _check(r, L)
    th, tw = shape
    H, W = scene.shape
    if th > H or tw > W:
        raise ValueError(f"window {tw}x{th} larger than scene {W}x{H}")
    x = (np.arange(tw) - (tw - 1) / 2) / L
    y = ((th - 1) / 2 - np.arange(th)) / L
    X = np.vander(x, r + 1, increasing=True)
    Y = np.vander(y, r + 1, increasing=True)
    sw = np.lib.stride_tricks.sliding_window_view(scene, tw, axis=1)  # (H, nx, tw)
    R = sw @ X  # (H, nx, r+1)
    sr = np.lib.stride_tricks.sliding_window_view(R, th, axis=0)  # (ny, nx, r+1, th)
    m = sr @ Y  # (ny, nx, r+1, r+1)
    m[..., ~order_mask(r)] = 0
    return m


def gaussian_moments(a: float, centroid, sigma, r: int, L: float = 1.0) -> MomentTable:
    """Geometric moments of ``a * G_sigma`` centered at ``centroid`` (pixel units).

    An all-zero ``sigma`` gives the point mass ``a * delta(x - centroid)``.
    Central moments follow the Isserlis recursion
    ``mu_pq = (p-1) S11 mu_{p-2,q} + q S12 mu_{p-1,q-1}`` (and the mirrored rule
    for ``p = 0``), then are shifted to the origin by binomial expansion.
    """
    _check(r, L)
    S = np.asarray(sigma, dtype=np.float64)
    if S.shape != (2, 2) or not np.allclose(S, S.T, rtol=0, atol=1e-12 * np.abs(S).max(initial=0.0)):
        raise ValueError("sigma must be a symmetric 2x2 matrix")
    if np.any(S) and (S[0, 0] <= 0 or np.linalg.det(S) <= 0):
        raise NumericalError("covariance matrix is not positive definite")
    S = S / L**2
    cx, cy = centroid[0] / L, centroid[1] / L
    mu = np.zeros((r + 1, r + 1))
    mu[0, 0] = a
    for p, q in indices(r)[1:]:
        if p >= 1:
            v = q * S[0, 1] * mu[p - 1, q - 1] if q >= 1 else 0.0
            if p >= 2:
                v += (p - 1) * S[0, 0] * mu[p - 2, q]
        else:
            v = (q - 1) * S[1, 1] * mu[0, q - 2] if q >= 2 else 0.0
        mu[p, q] = v
    m = np.zeros_like(mu)
    for p, q in indices(r):
        m[p, q] = sum(
            comb(p, k) * comb(q, j) * cx ** (p - k) * cy ** (q - j) * mu[k, j]
            for k in range(p + 1)
            for j in range(q + 1)
        )
    return MomentTable(GEOMETRIC, r, float(L), (0.0, 0.0), m)
