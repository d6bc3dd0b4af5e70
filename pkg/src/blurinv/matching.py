"""Template localization and nearest-neighbour recognition in invariant space."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .image import Image
from .invariants import (
    InvariantVector,
    factorial_weights,
    invariants_from_moments,
    moment_invariants,
    trivial_mask,
)
from .moments import COMPLEX, geo_to_complex, order_mask, transform_geometric, window_moments
from .projectors import CENTRO, BlurClass, Kind, _rotation_frame

# calibrated on the synthetic recognition corpus: absent classes stay below ~2.3,
# correctly recognized queries above ~9
AMBIGUOUS_MARGIN = 3.0
MIN_POOL = 16


@dataclass(frozen=True)
class MatchHit:
    """Window with top-left pixel ``(x, y)`` = (column, row)."""

    x: int
    y: int
    distance: float
    rank: int

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "distance": self.distance, "rank": self.rank}


def _basis_moments(m_geo: np.ndarray, blur_class: BlurClass, basis: str, r: int) -> np.ndarray:
    if basis == COMPLEX:
        return geo_to_complex(m_geo, r)
    if blur_class.kind is Kind.DIRECTIONAL and blur_class.beta != 0.0:
        return transform_geometric(m_geo, _rotation_frame(blur_class.beta), r)
    return m_geo


class _WindowScorer:
    """Distances of scene windows to a template, evaluated lazily at requested positions."""

    def __init__(self, scene: Image, template: Image, blur_class, r, L, raw: bool):
        self.blur_class = blur_class
        self.r = r
        self.L = L
        self.raw = raw
        self.basis = blur_class.working_basis
        self.scene = scene.samples
        self.shape = template.shape
        self.moments = window_moments(self.scene, self.shape, r, L)  # (ny, nx, r+1, r+1)
        self.l1 = window_moments(np.abs(self.scene), self.shape, 0, L)[..., 0, 0]
        ref = window_moments(template.samples, self.shape, r, L)[0, 0]
        self.ref = self._features(ref[None])[0]
        sel = order_mask(r) if raw else order_mask(r) & ~trivial_mask(blur_class, self.basis, r)
        self.weights = factorial_weights(r)[sel]
        self.sel = sel

    def _features(self, m_geo):
        m = _basis_moments(m_geo, self.blur_class, self.basis, self.r)
        if self.raw:
            return m
        return invariants_from_moments(m, self.blur_class, self.basis, self.r, self.L)

    def distances(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        m = self.moments[rows, cols]
        C = self._features(m)
        d2 = (np.abs(C[..., self.sel] - self.ref[self.sel]) ** 2 * self.weights).sum(axis=-1)
        d = np.sqrt(d2)
        dead = ~(np.abs(m[..., 0, 0]) > 1e-9 * self.l1[rows, cols]) | ~np.isfinite(d)
        return np.where(dead, np.inf, d)


def match_template(
    scene: Image,
    template: Image,
    blur_class: BlurClass = CENTRO,
    r: int = 7,
    L: float | None = None,
    stride: int = 1,
    topk: int = 1,
    raw_moments: bool = False,
) -> list[MatchHit]:
    """Locate ``template`` in ``scene`` by minimum invariant distance.

    Every window of template size at the given stride is scored (moments about
    the window center, shared ``L``, factorial weights). The best
    ``max(topk, 16)`` coarse windows are refined at stride 1 within
    ``+-stride``. Hits are ordered by ``(distance, y, x)``.

    Parameters
    ----------
    raw_moments : bool
        Score with the full raw moment table (same basis and weights) in
        place of the invariants, as a blur-sensitive baseline.
    """
    th, tw = template.shape
    if th > scene.height or tw > scene.width:
        raise DataError(f"template {tw}x{th} larger than scene {scene.width}x{scene.height}")
    if stride < 1 or topk < 1:
        raise ValueError("stride and topk must be positive")
    L = float(max(th, tw) / 2 if L is None else L)
    sc = _WindowScorer(scene, template, blur_class, r, L, raw_moments)
    ny, nx = scene.height - th + 1, scene.width - tw + 1
    ys, xs = np.meshgrid(np.arange(0, ny, stride), np.arange(0, nx, stride), indexing="ij")
    ys, xs = ys.ravel(), xs.ravel()
    d = sc.distances(ys, xs)
    scores = {(int(y), int(x)): float(v) for y, x, v in zip(ys, xs, d)}
    if stride > 1:
        pool = sorted(scores, key=lambda k: (scores[k], k))[: max(topk, MIN_POOL)]
        extra = set()
        for y0, x0 in pool:
            for y in range(max(0, y0 - stride), min(ny, y0 + stride + 1)):
                for x in range(max(0, x0 - stride), min(nx, x0 + stride + 1)):
                    if (y, x) not in scores:
                        extra.add((y, x))
        if extra:
            ey, ex = np.array(sorted(extra)).T
            for y, x, v in zip(ey, ex, sc.distances(ey, ex)):
                scores[(int(y), int(x))] = float(v)
    best = sorted(scores, key=lambda k: (scores[k], k))[:topk]
    return [MatchHit(x=x, y=y, distance=scores[(y, x)], rank=i) for i, (y, x) in enumerate(best)]


# ---------------------------------------------------------------------------
# classification


@dataclass
class Gallery:
    """Labelled invariant vectors with per-dimension standardization statistics."""

    labels: list
    vectors: list
    mean: np.ndarray = field(init=False)
    std: np.ndarray = field(init=False)

    def __post_init__(self):
        if not self.vectors:
            raise DataError("gallery is empty")
        if len(self.labels) != len(self.vectors):
            raise ValueError("labels and vectors differ in length")
        cfg = self.vectors[0].config
        if any(v.config != cfg for v in self.vectors):
            raise ValueError("gallery vectors do not share one configuration")
        X = self.features()
        self.mean = X.mean(axis=0)
        self.std = np.maximum(X.std(axis=0), 1e-12)

    @property
    def config(self):
        return self.vectors[0].config

    def features(self) -> np.ndarray:
        return np.stack([v.features() for v in self.vectors])

    @classmethod
    def build(cls, items, blur_class: BlurClass, r: int, L: float) -> "Gallery":
        """From ``(label, Image)`` pairs."""
        labels, vecs = [], []
        for label, img in items:
            labels.append(label)
            vecs.append(moment_invariants(img, blur_class, r, L))
        return cls(labels, vecs)

    def save(self, directory) -> None:
        os.makedirs(directory, exist_ok=True)
        entries = []
        for i, (label, v) in enumerate(zip(self.labels, self.vectors)):
            name = f"{i:04d}.json"
            with open(os.path.join(directory, name), "w") as fh:
                json.dump(v.to_dict(), fh)
            entries.append({"label": label, "file": name})
        cls_, basis, r, L = self.config
        manifest = {"class": cls_, "basis": basis, "r": r, "L": L, "entries": entries}
        with open(os.path.join(directory, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=1)

    @classmethod
    def load(cls, directory) -> "Gallery":
        try:
            with open(os.path.join(directory, "manifest.json")) as fh:
                manifest = json.load(fh)
            labels, vecs = [], []
            for e in manifest["entries"]:
                with open(os.path.join(directory, e["file"])) as fh:
                    vecs.append(InvariantVector.from_dict(json.load(fh)))
                labels.append(e["label"])
        except (OSError, KeyError, ValueError) as exc:
            raise DataError(f"cannot load gallery from {directory}: {exc}") from None
        return cls(labels, vecs)


@dataclass(frozen=True)
class Prediction:
    label: str
    distance: float
    margin: float

    @property
    def ambiguous(self) -> bool:
        return self.margin < AMBIGUOUS_MARGIN

    def to_dict(self) -> dict:
        return {"label": self.label, "distance": self.distance, "margin": self.margin, "ambiguous": self.ambiguous}


def classify_vector(gallery: Gallery, q: InvariantVector) -> Prediction:
    if q.config != gallery.config:
        raise ValueError(f"query configuration {q.config} differs from gallery {gallery.config}")
    X = gallery.features()
    d = np.sqrt((((X - q.features()) / gallery.std) ** 2).sum(axis=1))
    order = np.lexsort((np.arange(len(d)), d))
    best = order[0]
    label = gallery.labels[best]
    others = [i for i in order if gallery.labels[i] != label]
    d1 = float(d[best])
    if not others:
        return Prediction(label, d1, math.inf)
    d2 = float(d[others[0]])
    margin = math.inf if d1 == 0 else (d2 - d1) / d1
    return Prediction(label, d1, margin)


def classify_nn(gallery: Gallery, query: Image, blur_class: BlurClass, r: int, L: float) -> Prediction:
    """Nearest gallery label under standardized Euclidean distance over nontrivial entries.

    ``margin = (d2 - d1) / d1`` uses the nearest entry of a different label;
    ``Prediction.ambiguous`` flags margins below ``AMBIGUOUS_MARGIN``.
    """
    return classify_vector(gallery, moment_invariants(query, blur_class, r, L))
