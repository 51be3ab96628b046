"""Principal component analysis via the sample covariance matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import as_data_matrix, center_columns
from .numerics import symmetric_eigen


@dataclass(frozen=True)
class PcaModel:
    """Fitted projection: ``mean`` (D,), ``components`` (d, D) orthonormal rows, ``variances`` (d,) descending."""

    mean: np.ndarray
    components: np.ndarray
    variances: np.ndarray

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def fit(X, d: int) -> PcaModel:
    """Fit the ``d`` directions of largest sample variance (divisor ``n - 1``).

    Fails when a requested direction carries no variance, i.e. its variance
    is at most ``1e-12`` times the leading one.
    """
    X = as_data_matrix(X)
    n, D = X.shape
    if not 1 <= d <= min(n - 1, D):
        raise ValueError(f"d must be in [1, min(n-1, D)] = [1, {min(n - 1, D)}], got {d}")
    Xc, mean = center_columns(X)
    cov = Xc.T @ Xc / (n - 1)
    eig = symmetric_eigen(0.5 * (cov + cov.T), d)
    variances = eig.eigenvalues
    if variances[0] <= 0.0:
        raise ValueError("data has zero variance (all rows identical)")
    if variances[-1] <= 1e-12 * variances[0]:
        weak = int(np.argmax(variances <= 1e-12 * variances[0]))
        raise ValueError(
            f"component {weak} has no variance ({variances[weak]:.3e}); data rank is below d={d}"
        )
    return PcaModel(mean, eig.eigenvectors.T.copy(), variances.copy())


def transform(X, model: PcaModel) -> np.ndarray:
    X = as_data_matrix(X)
    if X.shape[1] != model.n_features:
        raise ValueError(f"X has {X.shape[1]} columns, model expects {model.n_features}")
    return (X - model.mean) @ model.components.T


def inverse_transform(Y, model: PcaModel) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.float64)
    return model.mean + Y @ model.components


def fit_transform(X, d: int) -> tuple[np.ndarray, PcaModel]:
    model = fit(X, d)
    return transform(X, model), model
