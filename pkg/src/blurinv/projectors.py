"""Blur classes, their projection operators and moment index sets.

Every blur space S comes with a projector P onto S. ``project`` realizes P on
discrete images; ``projected_moments`` realizes it on moment tables in closed
form, which is what the moment invariants use.

Grid-exact realizations (index flips, 90-degree rotations, column collapses) are
used whenever the class allows them. Rotation-type classes without a grid-exact
form (radial, N-fold with N not in {1, 2, 4}, dihedral with an off-grid axis) are
realized as least-squares projections onto a discretized symmetric subspace
spanned by ``hat_j(r) * {cos, sin}(m theta)`` with ``m`` restricted to the
symmetry's harmonics; these are idempotent and orthogonal to rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import linalg

from .errors import NumericalError
from .image import Image
from .moments import (
    COMPLEX,
    GEOMETRIC,
    MomentTable,
    complex_to_geo,
    gaussian_moments,
    geo_to_complex,
    indices,
    moments,
    order_mask,
    transform_geometric,
)


class Kind(str, Enum):
    IDENTITY = "identity"
    DELTA = "delta"
    EVEN1D = "even1d"
    CENTRO = "centro"
    NFOLD = "nfold"
    RADIAL = "radial"
    DIHEDRAL = "dihedral"
    DIRECTIONAL = "directional"
    GAUSS = "gauss"


_EXACT_AXES = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)


class NoSeparatingBasis(ValueError):
    """The class has no moment-separating basis; use the generic projected-moment path."""


@dataclass(frozen=True)
class BlurClass:
    """A blur space S with its parameters.

    ``n`` is the fold number for N-fold and dihedral classes, ``alpha`` the
    dihedral axis angle and ``beta`` the directional blur angle, both in
    ``[0, pi)``.
    """

    kind: Kind
    n: int = 0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind in (Kind.NFOLD, Kind.DIHEDRAL):
            if int(self.n) != self.n or self.n < 1:
                raise ValueError(f"fold number must be a positive integer, got {self.n}")
            object.__setattr__(self, "n", int(self.n))
        elif self.n:
            raise ValueError(f"{self.kind.value} takes no fold number")
        for name in ("alpha", "beta"):
            v = float(getattr(self, name))
            if not 0.0 <= v < math.pi:
                raise ValueError(f"{name} must lie in [0, pi), got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def parse(cls, text: str) -> "BlurClass":
        """Parse ``centro``, ``nfold:N``, ``radial``, ``dihedral:N:alpha``,
        ``directional:beta``, ``gauss``, ``even1d``, ``identity`` or ``delta``."""
        parts = text.strip().lower().split(":")
        try:
            kind = Kind(parts[0])
        except ValueError:
            raise ValueError(f"unknown blur class {text!r}") from None
        args = parts[1:]
        try:
            if kind is Kind.NFOLD and len(args) == 1:
                return cls(kind, n=int(args[0]))
            if kind is Kind.DIHEDRAL and len(args) == 2:
                return cls(kind, n=int(args[0]), alpha=float(args[1]))
            if kind is Kind.DIRECTIONAL and len(args) <= 1:
                return cls(kind, beta=float(args[0]) if args else 0.0)
            if not args and kind not in (Kind.NFOLD, Kind.DIHEDRAL):
                return cls(kind)
        except ValueError as exc:
            raise ValueError(f"bad blur class {text!r}: {exc}") from None
        raise ValueError(f"bad parameters for blur class {text!r}")

    def __str__(self):
        if self.kind is Kind.NFOLD:
            return f"nfold:{self.n}"
        if self.kind is Kind.DIHEDRAL:
            return f"dihedral:{self.n}:{self.alpha!r}"
        if self.kind is Kind.DIRECTIONAL:
            return f"directional:{self.beta!r}"
        return self.kind.value

    @property
    def grid_exact(self) -> bool:
        """True when the image projector needs no interpolation."""
        k = self.kind
        if k in (Kind.IDENTITY, Kind.DELTA, Kind.EVEN1D, Kind.CENTRO):
            return True
        if k is Kind.NFOLD:
            return self.n in (1, 2, 4)
        if k is Kind.DIHEDRAL:
            return self.n in (1, 2, 4) and self.alpha in _EXACT_AXES
        if k is Kind.DIRECTIONAL:
            return self.beta in (0.0, math.pi / 2)
        return False

    @property
    def separating_basis(self) -> str | None:
        if self.kind in (Kind.NFOLD, Kind.RADIAL):
            return COMPLEX
        if self.kind in (Kind.DIHEDRAL, Kind.GAUSS):
            return None
        return GEOMETRIC

    @property
    def working_basis(self) -> str:
        """Basis the invariants are expressed in."""
        if self.kind in (Kind.NFOLD, Kind.RADIAL, Kind.DIHEDRAL):
            return COMPLEX
        return GEOMETRIC


CENTRO = BlurClass(Kind.CENTRO)
RADIAL = BlurClass(Kind.RADIAL)
GAUSS = BlurClass(Kind.GAUSS)
EVEN1D = BlurClass(Kind.EVEN1D)
IDENTITY = BlurClass(Kind.IDENTITY)
DELTA = BlurClass(Kind.DELTA)


def nfold(n: int) -> BlurClass:
    return BlurClass(Kind.NFOLD, n=n)


def dihedral(n: int, alpha: float = 0.0) -> BlurClass:
    return BlurClass(Kind.DIHEDRAL, n=n, alpha=alpha)


def directional(beta: float = 0.0) -> BlurClass:
    return BlurClass(Kind.DIRECTIONAL, beta=beta)


# ---------------------------------------------------------------------------
# index sets


@dataclass(frozen=True)
class IndexSet:
    """Multi-indices whose moments survive the projection, in a given basis."""

    blur_class: BlurClass
    basis: str
    difference_closed: bool = field(default=True)

    def __contains__(self, pq) -> bool:
        p, q = pq
        k = self.blur_class.kind
        if k is Kind.IDENTITY:
            return True
        if k is Kind.DELTA:
            return p == 0 and q == 0
        if k is Kind.EVEN1D:
            return p % 2 == 0
        if k is Kind.CENTRO:
            return (p + q) % 2 == 0
        if k is Kind.NFOLD:
            return (p - q) % self.blur_class.n == 0
        if k is Kind.RADIAL:
            return p == q
        if k is Kind.DIRECTIONAL:
            return q == 0
        raise AssertionError(k)

    def enumerate(self, r: int):
        return [pq for pq in indices(r) if pq in self]

    def mask(self, r: int) -> np.ndarray:
        m = np.zeros((r + 1, r + 1), dtype=bool)
        for p, q in self.enumerate(r):
            m[p, q] = True
        return m


def index_set(blur_class: BlurClass, basis: str | None = None) -> IndexSet:
    """Index set D for a class with a separating basis.

    Raises :class:`NoSeparatingBasis` for dihedral and Gaussian classes.
    Directional sets are expressed in coordinates rotated by ``beta``.
    """
    native = blur_class.separating_basis
    if native is None:
        raise NoSeparatingBasis(f"{blur_class} has no separating basis; use the generic projected-moment path")
    basis = basis or native
    k = blur_class.kind
    ok = basis == native or k in (Kind.IDENTITY, Kind.DELTA, Kind.CENTRO)
    ok = ok or (k is Kind.NFOLD and blur_class.n in (1, 2))
    if not ok:
        raise ValueError(f"{basis} moments do not separate {blur_class}")
    return IndexSet(blur_class, basis, True)


# ---------------------------------------------------------------------------
# moment-domain projection


def _rotation_frame(beta: float) -> np.ndarray:
    c, s = math.cos(beta), math.sin(beta)
    return np.array([[c, s], [-s, c]])


def gaussian_fit(table: MomentTable):
    """Mass, centroid and covariance (pixel units) from a geometric table of order >= 2."""
    if table.basis != GEOMETRIC or table.r < 2:
        raise ValueError("need a geometric table of order >= 2")
    m = table.values
    L = table.L
    a = m[0, 0]
    if not abs(a) > 0 or a < 0:
        raise NumericalError("Gaussian projection needs positive mass")
    cx, cy = m[1, 0] / a, m[0, 1] / a
    s11 = m[2, 0] / a - cx * cx
    s12 = m[1, 1] / a - cx * cy
    s22 = m[0, 2] / a - cy * cy
    S = np.array([[s11, s12], [s12, s22]]) * L * L
    if not np.any(S):
        return a, (cx * L, cy * L), S  # a point mass: the degenerate Gaussian
    if s11 <= 0 or np.linalg.det(S) <= 0:
        raise NumericalError("Gaussian fit: covariance is not positive definite")
    return a, (cx * L, cy * L), S


def projected_moments(m: np.ndarray, blur_class: BlurClass, basis: str, r: int, L: float = 1.0) -> np.ndarray:
    """Moments of ``P f`` from the moments of ``f``, in closed form.

    ``m`` is an array whose last two axes form an order-``r`` table in ``basis``.
    For directional classes with ``beta != 0`` the geometric tables are taken in
    the beta-rotated frame.
    """
    k = blur_class.kind
    if k is Kind.GAUSS:
        if basis != GEOMETRIC:
            raise ValueError("Gaussian projection works on geometric moments")
        flat = np.reshape(m, (-1, r + 1, r + 1))
        out = np.empty_like(flat)
        for i, t in enumerate(flat):
            a, c, S = gaussian_fit(MomentTable(GEOMETRIC, r, L, (0.0, 0.0), t))
            out[i] = gaussian_moments(a, c, S, r, L).values
        return out.reshape(np.shape(m))
    if k is Kind.DIHEDRAL:
        c = m if basis == COMPLEX else geo_to_complex(m, r)
        p, q = np.indices((r + 1, r + 1))
        phase = np.exp(2j * blur_class.alpha * (p - q))
        cq = np.swapaxes(c, -1, -2)
        out = np.where((p - q) % blur_class.n == 0, (c + phase * cq) / 2, 0)
        out = np.where(order_mask(r), out, 0)
        return out if basis == COMPLEX else complex_to_geo(out, r).real
    D = index_set(blur_class, basis).mask(r)
    return np.where(D, m, 0)


# ---------------------------------------------------------------------------
# image-domain projection


def _flip(a: np.ndarray, alpha: float) -> np.ndarray:
    """Reflection over the axis at angle alpha, for grid-exact axes on square centered canvases."""
    if alpha == 0.0:
        return a[::-1, :]
    if alpha == math.pi / 2:
        return a[:, ::-1]
    if alpha == math.pi / 4:
        return a[::-1, ::-1].T
    return a.T


def _rot_average(a: np.ndarray, n: int) -> np.ndarray:
    if n == 1:
        return a
    if n == 2:
        return (a + a[::-1, ::-1]) / 2
    return (a + np.rot90(a, 1) + np.rot90(a, 2) + np.rot90(a, 3)) / 4


def _disk_canvas(f: Image) -> Image:
    """Centered square canvas large enough to hold every rotation of the support."""
    c = f.centered()
    ys, xs = np.nonzero(c.samples)
    if len(xs) == 0:
        rmax = 0.0
    else:
        x = xs - c.origin[0]
        y = c.origin[1] - ys
        rmax = float(np.sqrt((x * x + y * y).max()))
    half_w, half_h = (c.width - 1) / 2, (c.height - 1) / 2
    # keep the parity of the origin (integer vs half-integer)
    frac = half_w - math.floor(half_w)
    if (half_h - math.floor(half_h)) != frac:
        raise ValueError("origin parities differ in x and y")
    # the inscribed disk has radius floor(half) and must hold the support
    half = max(math.ceil(rmax - 1e-9) + frac, half_w, half_h)
    px = int(round(half - half_w))
    py = int(round(half - half_h))
    return c.pad(top=py, bottom=py, left=px, right=px)


# D-moments up to this order are reproduced exactly by interpolated projectors
EXACT_MOMENT_ORDER = 8
# radial knot spacing in pixels; integer spacing aliases with the pixel rings
KNOT = 1.5


def _harmonics(kind, n, jmax):
    """Angular frequencies kept by the symmetric subspace."""
    if kind == Kind.RADIAL.value:
        return [0]
    return list(range(0, jmax + 1, n))


@lru_cache(maxsize=32)
def _ls_operator(shape, origin, kind, n, alpha):
    """Orthonormal basis ``Q`` of the discretized symmetric subspace.

    The subspace lives on the disk ``R <= J`` inscribed in the canvas and is
    spanned by radial hat functions (``KNOT`` pixels apart) times the kept angular
    harmonics, plus the sampled symmetric monomials ``z^p conj(z)^q`` up to
    ``EXACT_MOMENT_ORDER`` so those moments survive projection exactly.
    """
    H, W = shape
    ox, oy = origin
    x = np.arange(W) - ox
    y = oy - np.arange(H)
    X, Y = np.meshgrid(x, y)
    R = np.hypot(X, Y).ravel()
    T = np.arctan2(Y, X).ravel()
    J = math.floor(min(ox, oy, W - 1 - ox, H - 1 - oy) + 1e-9)
    inside = R <= J + 1e-9
    cols = []
    for j in range(int(J / KNOT) + 2):
        hat = np.where(inside, np.clip(1.0 - np.abs(R / KNOT - j), 0.0, None), 0.0)
        if not hat.any():
            continue
        for m in _harmonics(kind, n, int(j * KNOT)):
            if m == 0:
                cols.append(hat)
            elif kind == Kind.DIHEDRAL.value:
                cols.append(hat * np.cos(m * (T - alpha)))
            else:
                cols.append(hat * np.cos(m * T))
                cols.append(hat * np.sin(m * T))
    Z = (X + 1j * Y).ravel() / max(J, 1)
    for p, q in indices(EXACT_MOMENT_ORDER):
        d = p - q
        if d if kind == Kind.RADIAL.value else d % n:
            continue
        if kind == Kind.DIHEDRAL.value:
            if p < q:
                continue
            # symmetric under the reflection z -> exp(2i alpha) conj(z)
            zz = Z**p * np.conj(Z) ** q
            zz = zz + np.exp(2j * alpha * d) * np.conj(zz)
            parts = [zz.real, zz.imag]
        elif p < q:
            continue
        else:
            zz = Z**p * np.conj(Z) ** q
            parts = [zz.real, zz.imag] if d else [zz.real]
        cols.extend(np.where(inside, v, 0.0) for v in parts)
    B = np.stack(cols, axis=1)[inside]
    U, sv, _ = linalg.svd(B, full_matrices=False, lapack_driver="gesvd")
    Q = np.zeros((H * W, int((sv > sv[0] * 1e-10).sum())))
    Q[inside] = U[:, : Q.shape[1]]
    Q.setflags(write=False)
    return Q


def _ls_project(f: Image, kind: Kind, n: int = 0, alpha: float = 0.0) -> Image:
    c = _disk_canvas(f)
    Q = _ls_operator(c.shape, c.origin, kind.value, n, alpha)
    v = Q @ (Q.T @ c.samples.ravel())
    return c.with_samples(v.reshape(c.shape))


def _point_mass(f: Image, mass: float, x: float, y: float) -> Image:
    """``mass`` at continuous position ``(x, y)``, bilinearly split when off-grid."""
    col, row = f.origin[0] + x, f.origin[1] - y
    c0, r0 = math.floor(col), math.floor(row)
    c1, r1 = c0 + (col > c0), r0 + (row > r0)
    f = f.pad(top=max(0, -r0), bottom=max(0, r1 + 1 - f.height), left=max(0, -c0), right=max(0, c1 + 1 - f.width))
    col, row = f.origin[0] + x, f.origin[1] - y
    c0, r0 = math.floor(col), math.floor(row)
    fc, fr = col - c0, row - r0
    a = np.zeros(f.shape)
    for dr, wr in ((0, 1 - fr), (1, fr)):
        for dc, wc in ((0, 1 - fc), (1, fc)):
            if wr * wc:
                a[r0 + dr, c0 + dc] += mass * wr * wc
    return f.with_samples(a)


def _project_delta(f: Image) -> Image:
    return _point_mass(f, f.samples.sum(), 0.0, 0.0)


def _project_directional(f: Image, beta: float) -> Image:
    if beta == 0.0:
        oy = f.origin[1]
        if not float(oy).is_integer() or not 0 <= oy < f.height:
            raise ValueError("horizontal directional projection needs an integer origin row inside the canvas")
        a = np.zeros(f.shape)
        a[int(oy)] = f.samples.sum(axis=0)
        return f.with_samples(a)
    if beta == math.pi / 2:
        ox = f.origin[0]
        if not float(ox).is_integer() or not 0 <= ox < f.width:
            raise ValueError("vertical directional projection needs an integer origin column inside the canvas")
        a = np.zeros(f.shape)
        a[:, int(ox)] = f.samples.sum(axis=1)
        return f.with_samples(a)
    # general angle: hat-weight every pixel onto unit-spaced knots along the
    # blur line, then splat the knots bilinearly back onto the grid
    c = _disk_canvas(f)
    x, y = c.coordinates()
    X, Y = np.meshgrid(x, y)
    cb, sb = math.cos(beta), math.sin(beta)
    t = (X * cb + Y * sb).ravel()
    v = c.samples.ravel()
    k0 = np.floor(t).astype(int)
    ft = t - k0
    kmin = k0.min()
    knots = np.zeros(k0.max() - kmin + 2)
    np.add.at(knots, k0 - kmin, v * (1 - ft))
    np.add.at(knots, k0 - kmin + 1, v * ft)
    kt = np.arange(len(knots)) + kmin
    cols = kt * cb + c.origin[0]
    rows = c.origin[1] - kt * sb
    out = np.zeros(c.shape)
    c0 = np.floor(cols).astype(int)
    r0 = np.floor(rows).astype(int)
    fc, fr = cols - c0, rows - r0
    for dr, wr in ((0, 1 - fr), (1, fr)):
        for dc, wc in ((0, 1 - fc), (1, fc)):
            rr, cc, ww = r0 + dr, c0 + dc, knots * wr * wc
            ok = (rr >= 0) & (rr < c.height) & (cc >= 0) & (cc < c.width) & (ww != 0)
            np.add.at(out, (rr[ok], cc[ok]), ww[ok])
    return c.with_samples(out)


def _project_gauss(f: Image) -> Image:
    t = moments(f, 2, 1.0)
    a, (cx, cy), S = gaussian_fit(t)
    if not np.any(S):
        return _point_mass(f, a, cx, cy)
    sd = math.sqrt(max(S[0, 0], S[1, 1]))
    ox, oy = f.origin
    # grow the canvas until it holds the centroid +- 6 sd
    need_l = max(0, math.ceil(6 * sd - (ox + cx)))
    need_r = max(0, math.ceil((ox + cx) + 6 * sd - (f.width - 1)))
    need_t = max(0, math.ceil(6 * sd - (oy - cy)))
    need_b = max(0, math.ceil((oy - cy) + 6 * sd - (f.height - 1)))
    g = f.pad(top=need_t, bottom=need_b, left=need_l, right=need_r)
    x, y = g.coordinates()
    X, Y = np.meshgrid(x - cx, y - cy)
    inv = np.linalg.inv(S)
    q = inv[0, 0] * X * X + 2 * inv[0, 1] * X * Y + inv[1, 1] * Y * Y
    e = np.exp(-0.5 * q)
    return g.with_samples(a * e / e.sum())


def project(f: Image, blur_class: BlurClass) -> Image:
    """Apply the projector of ``blur_class`` to an image.

    Continuous coordinates are preserved. The canvas is kept for centered
    inputs of flip-type classes; rotation-type classes first pad to a centered
    square (enclosing the support's rotation disk for interpolated classes).
    """
    k = blur_class.kind
    if k is Kind.IDENTITY:
        return f
    if k is Kind.DELTA:
        if not abs(f.samples.sum()) > 0:
            raise NumericalError("projection onto multiples of delta needs nonzero mass")
        return _project_delta(f)
    if k is Kind.EVEN1D:
        c = f.centered()
        return c.with_samples((c.samples + c.samples[:, ::-1]) / 2)
    if k is Kind.CENTRO or (k is Kind.NFOLD and blur_class.n == 2):
        c = f.centered()
        return c.with_samples((c.samples + c.samples[::-1, ::-1]) / 2)
    if k is Kind.NFOLD:
        if blur_class.n == 1:
            return f
        if blur_class.n == 4:
            try:
                c = f.square_centered()
            except ValueError:
                return _ls_project(f, k, 4)
            return c.with_samples(_rot_average(c.samples, 4))
        return _ls_project(f, k, blur_class.n)
    if k is Kind.RADIAL:
        return _ls_project(f, k)
    if k is Kind.DIHEDRAL:
        if blur_class.grid_exact:
            try:
                c = f.square_centered()
            except ValueError:
                c = None
            if c is not None:
                a = (c.samples + _flip(c.samples, blur_class.alpha)) / 2
                return c.with_samples(_rot_average(a, blur_class.n))
        return _ls_project(f, k, blur_class.n, blur_class.alpha)
    if k is Kind.DIRECTIONAL:
        return _project_directional(f, blur_class.beta)
    if k is Kind.GAUSS:
        return _project_gauss(f)
    raise AssertionError(k)


def random_member(blur_class: BlurClass, half_size: int, seed=None) -> Image:
    """Random nonnegative unit-mass kernel lying exactly in the class's discrete space.

    Supported for grid-exact classes and for the radial class (a random radial
    profile sampled at pixel radii).
    """
    from .psf import Psf

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = 2 * half_size + 1
    k = blur_class.kind
    if k is Kind.RADIAL:
        prof = rng.random(half_size * 2 + 2)
        x = np.arange(n) - half_size
        R = np.hypot(x[None, :], x[:, None])
        a = np.interp(R, np.arange(len(prof)), prof)
        a[R > half_size + 0.5] = 0
    elif k is Kind.DIRECTIONAL and blur_class.grid_exact:
        a = np.zeros((n, n))
        if blur_class.beta == 0.0:
            a[half_size] = rng.random(n)
        else:
            a[:, half_size] = rng.random(n)
    elif blur_class.grid_exact and k is not Kind.DELTA:
        a = project(Image(rng.random((n, n))), blur_class).samples
    elif k is Kind.DELTA:
        a = np.zeros((n, n))
        a[half_size, half_size] = 1.0
    else:
        raise ValueError(f"no exact random member generator for {blur_class}")
    return Psf(a / a.sum())


# ---------------------------------------------------------------------------
# separation check


@dataclass
class SeparationReport:
    blur_class: BlurClass
    basis: str
    tol: float
    violations: list = field(default_factory=list)
    max_error: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_separation(f: Image, blur_class: BlurClass, r: int, L: float) -> SeparationReport:
    """Compare moments of ``project(f)`` with the index-set prediction.

    Tolerance is ``1e-10 |m00|`` for grid-exact classes and ``1e-3 |m00|`` for
    interpolated ones.
    """
    D = index_set(blur_class)
    Pf = project(f, blur_class)
    mf = moments(f, r, L, D.basis).values
    mp = moments(Pf, r, L, D.basis).values
    if blur_class.kind is Kind.DIRECTIONAL and blur_class.beta != 0.0:
        A = _rotation_frame(blur_class.beta)
        mf = transform_geometric(mf, A, r)
        mp = transform_geometric(mp, A, r)
    m00 = abs(mf[0, 0])
    tol = (1e-10 if blur_class.grid_exact else 1e-3) * m00
    rep = SeparationReport(blur_class, D.basis, tol)
    for p, q in indices(r):
        err = abs(mp[p, q] - mf[p, q]) if (p, q) in D else abs(mp[p, q])
        rep.max_error = max(rep.max_error, float(err))
        if err > tol:
            rep.violations.append((p, q, float(err)))
    return rep
