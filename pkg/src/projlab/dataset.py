"""Loading labeled feature matrices and computing pairwise distances."""

from __future__ import annotations

import csv
import enum
from pathlib import Path
from typing import NamedTuple

import numpy as np


class DistanceKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"


class LabeledData(NamedTuple):
    X: np.ndarray
    labels: np.ndarray
    label_names: list[str]
    feature_names: list[str]


def as_data_matrix(X) -> np.ndarray:
    """Validate ``X`` as an ``n x D`` finite float matrix and return it as float64."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise ValueError(f"non-finite value at row {bad[0]}, column {bad[1]}")
    return X


def encode_labels(raw) -> tuple[np.ndarray, list[str]]:
    """Map label strings to dense integer codes in order of first appearance."""
    codes: dict[str, int] = {}
    out = np.empty(len(raw), dtype=np.int64)
    for i, value in enumerate(raw):
        out[i] = codes.setdefault(str(value), len(codes))
    return out, list(codes)


def load_csv(path, label_column: str = "label") -> LabeledData:
    """Read a headed CSV file into a feature matrix and integer labels.

    Every column other than ``label_column`` must parse as a real number.
    Labels are coded by first appearance; the original strings are kept in
    ``label_names``.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if label_column not in header:
            raise ValueError(f"{path}: label column {label_column!r} not in header {header}")
        li = header.index(label_column)
        feature_names = [h for j, h in enumerate(header) if j != li]
        rows: list[list[float]] = []
        raw_labels: list[str] = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise ValueError(
                    f"{path}: line {lineno} has {len(record)} fields, expected {len(header)}"
                )
            values = []
            for j, cell in enumerate(record):
                if j == li:
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {cell!r} at line {lineno}, "
                        f"column {header[j]!r}"
                    ) from None
            rows.append(values)
            raw_labels.append(record[li].strip())
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if not feature_names:
        raise ValueError(f"{path}: no feature columns")
    X = as_data_matrix(rows)
    labels, names = encode_labels(raw_labels)
    return LabeledData(X, labels, names, feature_names)


def center_columns(X) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the column means; returns ``(centered, mean)``."""
    X = as_data_matrix(X)
    mean = X.mean(axis=0)
    Xc = X - mean
    # second pass removes the rounding residue of the first
    residue = Xc.mean(axis=0)
    return Xc - residue, mean + residue


def standardize_columns(X) -> np.ndarray:
    """Center and scale every column to unit sample variance. Constant columns are only centered."""
    Xc, _ = center_columns(X)
    if Xc.shape[0] < 2:
        return Xc
    std = Xc.std(axis=0, ddof=1)
    std[std == 0] = 1.0
    return Xc / std


def squared_euclidean(X) -> np.ndarray:
    """Exactly symmetric matrix of squared Euclidean row distances with zero diagonal."""
    X = as_data_matrix(X)
    n = X.shape[0]
    D2 = np.zeros((n, n))
    # row-by-row upper triangle; each pair is computed once and mirrored
    for i in range(n - 1):
        diff = X[i + 1 :] - X[i]
        D2[i, i + 1 :] = np.einsum("ij,ij->i", diff, diff)
    return D2 + D2.T


def pairwise_distances(X, kind: DistanceKind | str = DistanceKind.EUCLIDEAN) -> np.ndarray:
    """Pairwise distance matrix under ``kind``.

    Euclidean is the L2 norm of row differences; cosine is
    ``1 - <x_i, x_j> / (|x_i| |x_j|)``, which needs every row to be nonzero.
    """
    kind = DistanceKind(kind)
    X = as_data_matrix(X)
    if kind is DistanceKind.EUCLIDEAN:
        return np.sqrt(squared_euclidean(X))

    norms = np.linalg.norm(X, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ValueError(f"cosine distance undefined: row {zero[0]} has zero norm")
    U = X / norms[:, None]
    n = U.shape[0]
    D = np.zeros((n, n))
    for i in range(n - 1):
        D[i, i + 1 :] = 1.0 - U[i + 1 :] @ U[i]
    D = np.clip(D, 0.0, 2.0)
    # rows that are positive multiples of each other
    D[D < 1e-15] = 0.0
    return D + D.T
