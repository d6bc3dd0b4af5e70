"""Seeded synthetic images and small experiment corpora."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image import Image, add_white_gaussian_noise, convolve_full
from .psf import psf_disk


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def smooth_texture(shape, seed=None, sigma: float = 2.0) -> np.ndarray:
    """Nonnegative Gaussian-filtered white noise scaled to [0, 1]."""
    a = ndimage.gaussian_filter(_rng(seed).random(shape), sigma, mode="wrap")
    a -= a.min()
    return a / a.max()


def blob_object(size: int, seed=None, n_blobs: int = 6, border: int = 4) -> Image:
    """Object of random anisotropic Gaussian blobs on a zero background.

    Blob centers stay ``border + 2 sigma`` away from the edge so the object has
    (numerically) compact support inside the canvas.
    """
    if 2 * border + size / 2 > size - 1:
        raise ValueError(f"object size {size} too small for border {border}")
    rng = _rng(seed)
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    a = np.zeros((size, size))
    for _ in range(n_blobs):
        s = rng.uniform(size / 16, size / 8, 2)
        lo = border + 2 * s.max()
        cx, cy = rng.uniform(lo, size - 1 - lo, 2)
        th = rng.uniform(0, np.pi)
        c, sn = np.cos(th), np.sin(th)
        u = (x - cx) * c + (y - cy) * sn
        v = -(x - cx) * sn + (y - cy) * c
        a += rng.uniform(0.3, 1.0) * np.exp(-0.5 * ((u / s[0]) ** 2 + (v / s[1]) ** 2))
    a[a < 1e-12 * a.max()] = 0.0
    return Image(a / a.max())


def random_image(shape, seed=None, offset: float = 0.0) -> Image:
    """Uniform random samples plus ``offset``; the origin sits at the canvas center."""
    return Image(_rng(seed).random(shape) + offset)


@dataclass(frozen=True)
class RecognitionCorpus:
    """Gallery objects and blurred, noisy queries with ground-truth labels."""

    gallery: list
    queries: list
    truth: list
    L: float


def recognition_corpus(
    n_classes: int = 10,
    per_class: int = 10,
    size: int = 64,
    blur_diameters=(5, 15),
    snr_db: float = 50.0,
    seed=0,
) -> RecognitionCorpus:
    """Desk-scale recognition set: one gallery object per class, queries blurred by disks.

    Disk diameters are drawn uniformly from ``blur_diameters`` (pixels) and noise
    is added at ``snr_db`` over the full convolution canvas.
    """
    rng = _rng(seed)
    gallery = [(f"c{i:02d}", blob_object(size, rng)) for i in range(n_classes)]
    queries, truth = [], []
    dmax = max(blur_diameters)
    for label, obj in gallery:
        for _ in range(per_class):
            d = rng.uniform(*blur_diameters)
            g = convolve_full(obj, psf_disk(d / 2))
            queries.append(add_white_gaussian_noise(g, snr_db, rng))
            truth.append(label)
    L = (size + dmax) / 2
    return RecognitionCorpus(gallery, queries, truth, L)


def _blob(n: int, rng) -> np.ndarray:
    """Off-center Gaussian spot that gives a template a strong asymmetric signature."""
    y, x = np.mgrid[0:n, 0:n]
    cx, cy = rng.uniform(0.25 * n, 0.75 * n, 2)
    s = n / 8
    return 2.0 * np.exp(-0.5 * ((x - cx) ** 2 + (y - cy) ** 2) / s**2)


def _soft_window(n: int, edge: int) -> np.ndarray:
    w = np.ones(n)
    if edge:
        k = np.arange(edge)
        w[:edge] = 0.5 * (1 - np.cos(np.pi * (k + 0.5) / edge))
        w[n - edge :] = w[:edge][::-1]
    return np.outer(w, w)


@dataclass(frozen=True)
class MatchingCorpus:
    scene: Image
    templates: list
    positions: list  # (x, y) top-left of each template in the scene


def matching_corpus(
    n_templates: int = 10,
    scene_size: int = 256,
    template_size: int = 40,
    psf_radius: float = 9.0,
    background: float = 0.1,
    edge: int = 12,
    texture_sigma: float = 3.0,
    seed=0,
) -> MatchingCorpus:
    """Distinct textured templates pasted on a flat background, then blurred.

    Template textures fade into the background over ``edge`` pixels, which
    limits the mass the blur moves across the template border. Templates sit
    on a grid with a gap of at least ``psf_radius`` to each other and to the
    scene border. The scene is blurred by a disk in place (edge replication).
    """
    rng = _rng(seed)
    t = template_size
    scene = np.full((scene_size, scene_size), background)
    cells = scene_size // (t + 2 * int(np.ceil(psf_radius)) + 4)
    slots = [(i, j) for i in range(cells) for j in range(cells)]
    if len(slots) < n_templates:
        raise ValueError("scene too small for the requested templates")
    pick = rng.choice(len(slots), n_templates, replace=False)
    step = scene_size // cells
    templates, positions = [], []
    for k in sorted(pick):
        i, j = slots[k]
        jitter = step - t - 2 * int(np.ceil(psf_radius)) - 2
        y = i * step + int(np.ceil(psf_radius)) + 1 + int(rng.integers(0, max(jitter, 1)))
        x = j * step + int(np.ceil(psf_radius)) + 1 + int(rng.integers(0, max(jitter, 1)))
        patch = smooth_texture((t, t), rng, sigma=texture_sigma) + _blob(t, rng)
        patch = background + patch / patch.max() * _soft_window(t, edge)
        scene[y : y + t, x : x + t] = patch
        templates.append(Image(patch))
        positions.append((x, y))
    h = psf_disk(psf_radius)
    blurred = ndimage.convolve(scene, h.samples, mode="nearest")
    return MatchingCorpus(Image(blurred), templates, positions)


@dataclass(frozen=True)
class RegistrationPair:
    reference: Image
    moving: Image
    shift: tuple[int, int]  # (dx, dy): moving[r, c] = reference[r - dy, c - dx]
    theta: float = 0.0
    radii: tuple[float, float] = (0.0, 0.0)


def registration_pairs(
    n_pairs: int = 25,
    frame: int = 128,
    radii=(3.0, 9.0),
    max_shift: int = 20,
    rotation_deg: float = 0.0,
    seed=0,
) -> list:
    """Frames cut from one smooth scene, each blurred by its own disk.

    The moving frame is the scene blurred by a second disk, optionally rotated
    counterclockwise by ``rotation_deg`` about the reference frame center, and
    cut at an integer offset (rotation first, then shift). Blur is applied to the whole scene first, so frame borders
    see real neighbouring content rather than zeros.
    """
    from .image import rotate

    rng = _rng(seed)
    side = frame + 2 * (max_shift + int(np.ceil(max(radii)))) + 16
    scene = ndimage.gaussian_filter(rng.random((side, side)), 2.0)
    c = (side - frame) // 2
    out = []
    for _ in range(n_pairs):
        dx, dy = (int(v) for v in rng.integers(-max_shift, max_shift + 1, 2))
        r1, r2 = rng.uniform(*radii, 2)
        a = ndimage.convolve(scene, psf_disk(r1).samples, mode="nearest")
        b = ndimage.convolve(scene, psf_disk(r2).samples, mode="nearest")
        if rotation_deg:
            # rotate about the reference frame center, then cut the shifted window
            pivot = (c + (frame - 1) / 2, c + (frame - 1) / 2)
            b = rotate(Image(b, pivot), np.radians(rotation_deg), order=3).samples
        f = Image(a[c : c + frame, c : c + frame])
        g = Image(b[c - dy : c - dy + frame, c - dx : c - dx + frame])
        out.append(RegistrationPair(f, g, (dx, dy), np.radians(rotation_deg), (float(r1), float(r2))))
    return out
