"""Slow, independent reference implementations used to check the library.

Nothing here calls the recurrence, the closed-form projected moments or the
basis-transition matrices of the package. Images are treated as weighted
point clouds, which is the same continuous model the package uses.
"""

from __future__ import annotations

import math

import numpy as np


def point_cloud(f):
    """``(x, y, w)`` arrays: continuous coordinates (y up) and sample weights."""
    a = np.asarray(f.samples)
    ox, oy = f.origin
    rows, cols = np.indices(a.shape)
    return (cols - ox).ravel().astype(float), (oy - rows).ravel().astype(float), a.ravel()


def brute_convolve(f, h):
    """Direct double loop; the output origin is the sum of the input origins."""
    from blurinv import Image

    a, b = f.samples, h.samples
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
    for i in range(b.shape[0]):
        for j in range(b.shape[1]):
            out[i : i + a.shape[0], j : j + a.shape[1]] += b[i, j] * a
    return Image(out, (f.origin[0] + h.origin[0], f.origin[1] + h.origin[1]))


def cloud_moments(x, y, w, r, L, basis="geometric"):
    """Moment table of a point cloud by direct summation."""
    x, y = np.asarray(x) / L, np.asarray(y) / L
    if basis == "geometric":
        out = np.zeros((r + 1, r + 1))
        for p in range(r + 1):
            for q in range(r + 1 - p):
                out[p, q] = math.fsum(w * x**p * y**q)
        return out
    z = x + 1j * y
    out = np.zeros((r + 1, r + 1), dtype=complex)
    for p in range(r + 1):
        for q in range(r + 1 - p):
            t = w * z**p * np.conj(z) ** q
            out[p, q] = complex(math.fsum(t.real), math.fsum(t.imag))
    return out


def brute_moments(f, r, L, basis="geometric"):
    return cloud_moments(*point_cloud(f), r, L, basis)


def _rot(t):
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


def group_elements(kind, n=0, alpha=0.0, r=0):
    """Linear maps whose average realizes the projector on point masses.

    The radial group is replaced by ``r + 1`` equally spaced rotations, which
    annihilates every harmonic up to order ``r``.
    """
    if kind == "centro":
        return [np.eye(2), -np.eye(2)]
    if kind == "even1d":
        return [np.eye(2), np.diag([-1.0, 1.0])]
    if kind == "nfold":
        return [_rot(2 * math.pi * j / n) for j in range(n)]
    if kind == "radial":
        m = r + 1
        return [_rot(2 * math.pi * j / m) for j in range(m)]
    if kind == "dihedral":
        c, s = math.cos(2 * alpha), math.sin(2 * alpha)
        flip = np.array([[c, s], [s, -c]])
        rots = [_rot(2 * math.pi * j / n) for j in range(n)]
        return rots + [R @ flip for R in rots]
    raise ValueError(kind)


def group_projected_moments(f, r, L, basis, kind, n=0, alpha=0.0):
    x, y, w = point_cloud(f)
    acc = 0
    G = group_elements(kind, n, alpha, r)
    for A in G:
        X, Y = A @ np.vstack([x, y])
        acc = acc + cloud_moments(X, Y, w, r, L, basis)
    return acc / len(G)


def directional_projected_moments(f, r, L, beta):
    """Geometric moments, in the beta-rotated frame, of ``f`` collapsed onto the beta line."""
    x, y, w = point_cloud(f)
    c, s = math.cos(beta), math.sin(beta)
    u = c * x + s * y
    return cloud_moments(u, np.zeros_like(u), w, r, L), cloud_moments(u, -s * x + c * y, w, r, L)


# ---------------------------------------------------------------------------
# bivariate truncated power series (exponential generating functions)


def _egf(m, r):
    """Scale a moment table to EGF coefficients ``m_pq / (p! q!)``."""
    out = np.zeros_like(m)
    for p in range(r + 1):
        for q in range(r + 1 - p):
            out[p, q] = m[p, q] / (math.factorial(p) * math.factorial(q))
    return out


def _unegf(a, r):
    out = np.zeros_like(a)
    for p in range(r + 1):
        for q in range(r + 1 - p):
            out[p, q] = a[p, q] * math.factorial(p) * math.factorial(q)
    return out


def series_multiply(a, b, r):
    out = np.zeros(a.shape, dtype=np.result_type(a, b))
    for p in range(r + 1):
        for q in range(r + 1 - p):
            for i in range(p + 1):
                for j in range(q + 1):
                    out[p, q] += a[i, j] * b[p - i, q - j]
    return out


def series_quotient(num, den, r):
    """Solve ``den * c = num`` as a dense linear system over all monomials of degree <= r."""
    idx = [(p, q) for p in range(r + 1) for q in range(r + 1 - p)]
    pos = {pq: k for k, pq in enumerate(idx)}
    T = np.zeros((len(idx), len(idx)), dtype=np.result_type(den, float))
    for (p, q), row in pos.items():
        for (i, j), col in pos.items():
            if i <= p and j <= q:
                T[row, col] = den[p - i, q - j]
    c = np.linalg.solve(T, np.array([num[pq] for pq in idx]))
    out = np.zeros_like(num, dtype=np.result_type(num, den, float))
    for pq, k in pos.items():
        out[pq] = c[k]
    return out


def series_exp(a, r):
    """``exp(a)`` for a series with zero constant term, by the power-sum definition."""
    out = np.zeros_like(a)
    out[0, 0] = 1.0
    term = out.copy()
    for k in range(1, r + 1):
        term = series_multiply(term, a, r) / k
        out = out + term
    return out


def quotient_invariants(m, mp, r):
    """``C`` such that EGF(m) = EGF(mp) * EGF(C)."""
    return _unegf(series_quotient(_egf(m, r), _egf(mp, r), r), r)


def gaussian_moment_oracle(mass, mean, cov, r, L):
    """Moments of ``mass * N(mean, cov)`` from the moment generating function.

    ``E exp(s.x) = exp(s.mean + s^T cov s / 2)``; the EGF coefficients of the
    moment table are the Taylor coefficients of that exponential.
    """
    mx, my = np.asarray(mean, float) / L
    S = np.asarray(cov, float) / L**2
    a = np.zeros((r + 1, r + 1))
    if r >= 1:
        a[1, 0], a[0, 1] = mx, my
    if r >= 2:
        a[2, 0], a[0, 2], a[1, 1] = S[0, 0] / 2, S[1, 1] / 2, S[0, 1]
    return mass * _unegf(series_exp(a, r), r)


def gaussian_projected_moments(f, r, L):
    x, y, w = point_cloud(f)
    mass = math.fsum(w)
    mx, my = math.fsum(w * x) / mass, math.fsum(w * y) / mass
    cxx = math.fsum(w * (x - mx) ** 2) / mass
    cyy = math.fsum(w * (y - my) ** 2) / mass
    cxy = math.fsum(w * (x - mx) * (y - my)) / mass
    return gaussian_moment_oracle(mass, (mx, my), [[cxx, cxy], [cxy, cyy]], r, L)


def oracle_invariants(f, kind, r, L, n=0, alpha=0.0, beta=0.0):
    """Invariants by series division, in the basis the package uses for ``kind``."""
    if kind in ("centro", "even1d"):
        m = brute_moments(f, r, L)
        return quotient_invariants(m, group_projected_moments(f, r, L, "geometric", kind), r)
    if kind in ("nfold", "radial", "dihedral"):
        m = brute_moments(f, r, L, "complex")
        return quotient_invariants(m, group_projected_moments(f, r, L, "complex", kind, n, alpha), r)
    if kind == "directional":
        mp, m = directional_projected_moments(f, r, L, beta)
        return quotient_invariants(m, mp, r)
    if kind == "gauss":
        return quotient_invariants(brute_moments(f, r, L), gaussian_projected_moments(f, r, L), r)
    raise ValueError(kind)


def on_common_canvas(a, b):
    """Zero-pad two images (origins differing by whole pixels) onto one grid; return both arrays."""
    (ax, ay), (bx, by) = a.origin, b.origin
    dx, dy = ax - bx, ay - by
    if dx != round(dx) or dy != round(dy):
        raise ValueError("origins are not on a common pixel lattice")
    left = max(ax, bx)
    top = max(ay, by)
    right = max(a.width - ax, b.width - bx)
    bottom = max(a.height - ay, b.height - by)
    H, W = int(round(top + bottom)), int(round(left + right))
    out = []
    for img, (ox, oy) in ((a, a.origin), (b, b.origin)):
        z = np.zeros((H, W))
        r0, c0 = int(round(top - oy)), int(round(left - ox))
        z[r0 : r0 + img.height, c0 : c0 + img.width] = img.samples
        out.append(z)
    return out


def max_abs_diff(a, b):
    x, y = on_common_canvas(a, b)
    return float(np.max(np.abs(x - y)))


def inner(a, b):
    x, y = on_common_canvas(a, b)
    return float(np.sum(x * y))
