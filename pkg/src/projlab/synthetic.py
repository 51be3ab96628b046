"""Synthetic labeled data sets for benchmarks and demos."""

from __future__ import annotations

import numpy as np


def gaussian_blobs(n_blobs: int = 3, per_blob: int = 100, dim: int = 10, separation: float = 10.0,
                   sigma: float = 1.0, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Isotropic Gaussian blobs whose centers are all ``separation * sigma`` apart.

    Centers sit on scaled coordinate axes, so ``n_blobs`` may not exceed ``dim``.
    Returns ``(X, labels)`` with blob ``c`` occupying rows ``c*per_blob .. (c+1)*per_blob - 1``.
    """
    if n_blobs > dim:
        raise ValueError(f"cannot place {n_blobs} equidistant centers on {dim} axes")
    rng = np.random.default_rng(seed)
    centers = np.eye(dim)[:n_blobs] * (separation * sigma / np.sqrt(2.0))
    labels = np.repeat(np.arange(n_blobs), per_blob)
    X = centers[labels] + sigma * rng.standard_normal((len(labels), dim))
    return X, labels


def informative_plus_noise(n_classes: int = 10, per_class: int = 50, informative: int = 40,
                           noise: int = 20, center_sd: float = 0.8, noise_sd: float = 1.8,
                           seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Class-structured features followed by pure-noise columns.

    The first ``informative`` columns hold class centers drawn from
    ``N(0, center_sd^2)`` plus unit within-class noise; the remaining
    ``noise`` columns are ``N(0, noise_sd^2)`` and carry no class signal.
    With the defaults the noise columns out-rank the class directions in
    variance, so a short PCA keeps mostly noise.
    """
    rng = np.random.default_rng(seed)
    centers = rng.normal(0.0, center_sd, size=(n_classes, informative))
    labels = np.repeat(np.arange(n_classes), per_class)
    signal = centers[labels] + rng.standard_normal((len(labels), informative))
    junk = noise_sd * rng.standard_normal((len(labels), noise))
    return np.hstack([signal, junk]), labels
