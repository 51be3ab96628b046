"""Multidimensional projection toolkit: t-SNE, Least-Square Projection, PCA and quality metrics."""

from . import dataset, lsp, metrics, numerics, pca, report, sweep, synthetic, tsne
from .dataset import DistanceKind, load_csv, pairwise_distances
from .lsp import LspConfig
from .metrics import Embedding, neighborhood_hit_curve, silhouette
from .tsne import TsneConfig

__version__ = "0.1.0"

__all__ = [
    "DistanceKind",
    "Embedding",
    "LspConfig",
    "TsneConfig",
    "dataset",
    "load_csv",
    "lsp",
    "metrics",
    "neighborhood_hit_curve",
    "numerics",
    "pairwise_distances",
    "pca",
    "report",
    "silhouette",
    "sweep",
    "synthetic",
    "tsne",
]
