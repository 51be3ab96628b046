"""Projection quality: silhouette coefficient and neighborhood hit."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import pairwise_distances

DEFAULT_K_MAX = 30


@dataclass(frozen=True)
class Embedding:
    """Low-dimensional coordinates with the class label of every point."""

    coords: np.ndarray
    labels: np.ndarray
    label_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if coords.ndim != 2:
            raise ValueError(f"coords must be 2-D, got shape {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("embedding has non-finite coordinates")
        if labels.shape != (coords.shape[0],):
            raise ValueError(f"{labels.shape[0]} labels for {coords.shape[0]} points")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "labels", labels)
        if not self.label_names:
            names = [str(c) for c in range(int(labels.max()) + 1)] if labels.size else []
            object.__setattr__(self, "label_names", names)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def label_name(self, code: int) -> str:
        return self.label_names[code] if code < len(self.label_names) else str(code)


@dataclass(frozen=True)
class MetricsReport:
    silhouette: float
    hit_curve: list[tuple[int, float]]


def silhouette_samples(coords, labels) -> np.ndarray:
    """Per-point silhouette values ``(b - a) / max(a, b)`` under Euclidean distance.

    Points alone in their class get 0, as do points with ``a = b = 0``.
    """
    coords = np.asarray(coords, dtype=np.float64)
    labels = np.asarray(labels)
    classes, codes = np.unique(labels, return_inverse=True)
    if coords.shape[0] < 2:
        raise ValueError("silhouette needs at least 2 points")
    if len(classes) < 2:
        raise ValueError("silhouette needs at least 2 distinct labels")

    D = pairwise_distances(coords)
    onehot = np.zeros((len(codes), len(classes)))
    onehot[np.arange(len(codes)), codes] = 1.0
    sums = D @ onehot
    counts = onehot.sum(axis=0)
    own = codes
    own_count = counts[own]

    with np.errstate(divide="ignore", invalid="ignore"):
        a = sums[np.arange(len(own)), own] / (own_count - 1)
        means = sums / counts
    means[np.arange(len(own)), own] = np.inf
    b = means.min(axis=1)

    denom = np.maximum(a, b)
    s = np.zeros(len(own))
    ok = (own_count > 1) & (denom > 0)
    s[ok] = (b[ok] - a[ok]) / denom[ok]
    return s


def silhouette(emb: Embedding) -> float:
    """Mean silhouette of the embedding against its labels, in ``[-1, 1]``."""
    return float(np.mean(silhouette_samples(emb.coords, emb.labels)))


def neighborhood_hit_curve(emb: Embedding, k_max: int = DEFAULT_K_MAX) -> np.ndarray:
    """Neighborhood hit for ``k = 1 .. k_max``; entry ``k - 1`` holds hit(k).

    hit(k) averages, over points, the fraction of the ``k`` nearest
    embedded neighbors (self excluded, ties to the lowest index) that share
    the point's label.
    """
    n = emb.n
    if not 1 <= k_max < n:
        raise ValueError(f"k_max must be in [1, n-1] = [1, {n - 1}], got {k_max}")
    D = pairwise_distances(emb.coords)
    np.fill_diagonal(D, np.inf)
    nn = np.argsort(D, axis=1, kind="stable")[:, :k_max]
    same = emb.labels[nn] == emb.labels[:, None]
    hits = np.cumsum(same, axis=1) / np.arange(1, k_max + 1)
    return hits.mean(axis=0)


def evaluate(emb: Embedding, k_max: int = DEFAULT_K_MAX) -> MetricsReport:
    curve = neighborhood_hit_curve(emb, min(k_max, emb.n - 1))
    return MetricsReport(
        silhouette(emb),
        [(k, float(h)) for k, h in enumerate(curve, start=1)],
    )
