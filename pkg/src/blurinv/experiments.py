"""Noise-robustness sweep of a single moment invariant over blur size and SNR."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .image import Image, add_white_gaussian_noise, convolve_full
from .invariants import moment_invariants
from .projectors import CENTRO, BlurClass
from .psf import psf_disk
from .synth import smooth_texture

DEFAULT_BLUR_SIZES = (3, 7, 11, 15, 21)
DEFAULT_SNRS = (50, 40, 30, 20, 10)


def thread_count(requested: int | None = None) -> int:
    """Worker count, capped by ``BLURINV_THREADS`` when set."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("BLURINV_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)


@dataclass(frozen=True)
class MreRow:
    blur_size: int
    snr_db: float
    mre: float


def mre_sweep(
    size: int = 64,
    blur_sizes=DEFAULT_BLUR_SIZES,
    snrs=DEFAULT_SNRS,
    trials: int = 20,
    blur_class: BlurClass = CENTRO,
    r: int = 7,
    index=(4, 3),
    seed: int = 0,
    texture_sigma: float = 3.0,
    threads: int | None = None,
) -> list[MreRow]:
    """Mean relative error of one invariant between clean and blurred, noisy images.

    The test image is a seeded ``size x size`` smooth texture. Each cell
    convolves it (full canvas) with a disk of diameter ``blur_size`` and adds
    ``trials`` independent noise draws at ``snr_db``. MRE is the mean of
    ``|C(g) - C(f)| / |C(f)|`` at ``index``. Every cell owns a child seed, so
    the result does not depend on the thread count.
    """
    p, q = index
    if p + q > r:
        raise ValueError(f"index {index} exceeds order {r}")
    cell_seeds = np.random.SeedSequence(seed).spawn(len(blur_sizes) * len(snrs))
    f = Image(smooth_texture((size, size), seed, texture_sigma))
    L = (size + max(blur_sizes)) / 2
    ref = moment_invariants(f, blur_class, r, L).values[p, q]
    cells = [(d, s) for d in blur_sizes for s in snrs]
    blurred = {d: convolve_full(f, psf_disk(d / 2)) for d in blur_sizes}

    def run(k):
        d, snr = cells[k]
        rng = np.random.default_rng(cell_seeds[k])
        errs = []
        for _ in range(trials):
            g = add_white_gaussian_noise(blurred[d], snr, rng)
            errs.append(abs(moment_invariants(g, blur_class, r, L).values[p, q] - ref) / abs(ref))
        return MreRow(int(d), float(snr), float(np.mean(errs)))

    with ThreadPoolExecutor(thread_count(threads)) as pool:
        return list(pool.map(run, range(len(cells))))
