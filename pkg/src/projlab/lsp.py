"""Least-Square Projection.

Control points are the medoids of a k-medoids clustering, placed in the
plane by classical MDS. Every other point is tied to the centroid of its
neighbors through a Laplacian, and the stacked system ``[L; C] x = [0; c]``
is solved in the least-squares sense once per output coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order

from .dataset import DistanceKind, as_data_matrix, pairwise_distances
from .metrics import Embedding
from .numerics import MedoidAssignment, RankDeficientError, classical_mds, k_medoids, sparse_least_squares


@dataclass(frozen=True)
class LspConfig:
    num_control_points: int = 25
    num_neighbors: int = 10
    distance: DistanceKind = DistanceKind.EUCLIDEAN
    out_dim: int = 2
    seed: int = 0

    def validate(self, n: int) -> None:
        if not 1 <= self.num_control_points <= n:
            raise ValueError(f"num_control_points must be in [1, {n}], got {self.num_control_points}")
        if not 1 <= self.num_neighbors < n:
            raise ValueError(f"num_neighbors must be in [1, {n - 1}], got {self.num_neighbors}")
        if self.out_dim < 1:
            raise ValueError("out_dim must be positive")
        if self.num_control_points < self.out_dim + 1:
            raise ValueError(
                f"MDS placement needs at least out_dim + 1 = {self.out_dim + 1} control points"
            )
        DistanceKind(self.distance)


@dataclass(frozen=True)
class ControlPointSet:
    indices: np.ndarray
    coords: np.ndarray


@dataclass(frozen=True)
class LaplacianSystem:
    A: sp.csr_matrix
    b: np.ndarray  # (n + nc, out_dim), one right-hand side per coordinate

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass
class LspResult:
    embedding: Embedding
    controls: ControlPointSet
    clusters: MedoidAssignment
    neighbors: list[np.ndarray]
    system: LaplacianSystem


def select_control_points(D, nc: int, seed: int = 0) -> tuple[np.ndarray, MedoidAssignment]:
    """Medoids of an ``nc``-cluster k-medoids run, with the full clustering."""
    clusters = k_medoids(D, nc, seed)
    return clusters.medoid_indices.copy(), clusters


def project_control_points(D_c, out_dim: int = 2) -> np.ndarray:
    """Classical MDS of the control points' distance submatrix."""
    coords, _, degenerate = classical_mds(D_c, out_dim, full_output=True)
    if degenerate:
        raise ValueError("control points coincide; MDS placement is degenerate")
    return coords


def _nearest(row: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    candidates = np.sort(candidates)
    order = np.argsort(row[candidates], kind="stable")
    return candidates[order[:k]]


def build_neighborhoods(D, assignment: MedoidAssignment, k: int) -> list[np.ndarray]:
    """Neighbor lists restricted to each point's cluster and the cluster nearest to it.

    Candidates for point ``i`` are the members of its own cluster plus those
    of the other cluster whose medoid is closest to its medoid. When fewer
    than ``k`` candidates exist the search falls back to all points. Ties
    go to the lowest index.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    medoids = assignment.medoid_indices
    nc = len(medoids)
    members = [assignment.members(c) for c in range(nc)]

    nearest_cluster = np.full(nc, -1)
    if nc > 1:
        between = D[np.ix_(medoids, medoids)].copy()
        np.fill_diagonal(between, np.inf)
        nearest_cluster = np.argmin(between, axis=1)

    everyone = np.arange(n)
    graph = []
    for i in range(n):
        c = assignment.assignment[i]
        pool = members[c]
        if nearest_cluster[c] >= 0:
            pool = np.concatenate([pool, members[nearest_cluster[c]]])
        pool = pool[pool != i]
        if len(pool) < k:
            pool = everyone[everyone != i]
        graph.append(_nearest(D[i], pool, k))
    return graph


def exact_neighborhoods(D, k: int) -> list[np.ndarray]:
    """Global k-nearest-neighbor lists, ties to the lowest index."""
    D = np.asarray(D, dtype=np.float64)
    everyone = np.arange(D.shape[0])
    return [_nearest(D[i], everyone[everyone != i], k) for i in range(D.shape[0])]


def assemble_system(graph, controls: ControlPointSet, n: int) -> LaplacianSystem:
    """Stack the uniform-weight Laplacian over the control-point rows.

    Row ``i < n`` has 1 on the diagonal and ``-1/k_i`` on each neighbor;
    row ``n + t`` has a single 1 in the column of control point ``t`` and
    its right-hand side is that control point's coordinates.
    """
    if len(graph) != n:
        raise ValueError(f"graph covers {len(graph)} points, expected {n}")
    idx = np.asarray(controls.indices, dtype=np.int64)
    coords = np.asarray(controls.coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[0] != len(idx):
        raise ValueError("control coordinates do not match control indices")
    if np.any((idx < 0) | (idx >= n)) or len(np.unique(idx)) != len(idx):
        raise ValueError("control indices must be distinct and in range")
    nc = len(idx)

    rows, cols, vals = [], [], []
    for i, nbrs in enumerate(graph):
        nbrs = np.asarray(nbrs, dtype=np.int64)
        if len(nbrs) == 0 or np.any(nbrs == i) or len(np.unique(nbrs)) != len(nbrs):
            raise ValueError(f"invalid neighbor list for point {i}")
        rows.append(np.full(len(nbrs) + 1, i))
        cols.append(np.concatenate([[i], nbrs]))
        vals.append(np.concatenate([[1.0], np.full(len(nbrs), -1.0 / len(nbrs))]))
    rows.append(n + np.arange(nc))
    cols.append(idx)
    vals.append(np.ones(nc))
    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n + nc, n)
    )
    b = np.zeros((n + nc, coords.shape[1]))
    b[n:] = coords
    return LaplacianSystem(A, b)


def points_without_control(graph, control_indices, n: int) -> np.ndarray:
    """Points from which no control point can be reached along neighbor links."""
    rows = np.concatenate([np.asarray(nb, dtype=np.int64) for nb in graph])
    cols = np.repeat(np.arange(n), [len(nb) for nb in graph])
    # reversed edges j -> i, plus a source node n linked to every control point
    rows = np.concatenate([rows, np.full(len(control_indices), n)])
    cols = np.concatenate([cols, np.asarray(control_indices, dtype=np.int64)])
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n + 1, n + 1))
    seen = breadth_first_order(adj, n, directed=True, return_predecessors=False)
    mask = np.ones(n + 1, dtype=bool)
    mask[seen] = False
    return np.flatnonzero(mask[:n])


def solve_system(system: LaplacianSystem, graph=None, controls: ControlPointSet | None = None) -> np.ndarray:
    """One least-squares solve per output coordinate, with a rank check."""
    out = np.empty((system.n, system.b.shape[1]))
    for j in range(system.b.shape[1]):
        try:
            out[:, j] = sparse_least_squares(system.A, system.b[:, j], check_rank=(j == 0))
        except RankDeficientError as err:
            detail = ""
            if graph is not None and controls is not None:
                orphans = points_without_control(graph, controls.indices, system.n)
                if orphans.size:
                    detail = f"; points {orphans[:10].tolist()} cannot reach a control point"
            raise RankDeficientError(
                f"LSP system is rank deficient (coordinate {j}){detail}: {err}", err.residual
            ) from err
    return out


def run_detailed(X, config: LspConfig = LspConfig(), labels=None, label_names=None) -> LspResult:
    X = as_data_matrix(X)
    n = X.shape[0]
    config.validate(n)
    D = pairwise_distances(X, config.distance)

    idx, clusters = select_control_points(D, config.num_control_points, config.seed)
    coords = project_control_points(D[np.ix_(idx, idx)], config.out_dim)
    controls = ControlPointSet(idx, coords)
    graph = build_neighborhoods(D, clusters, config.num_neighbors)
    system = assemble_system(graph, controls, n)
    Y = solve_system(system, graph, controls)

    if labels is None:
        labels = np.zeros(n, dtype=np.int64)
    emb = Embedding(Y, labels, list(label_names or []))
    return LspResult(emb, controls, clusters, graph, system)


def run(X, config: LspConfig = LspConfig(), labels=None, **kwargs) -> Embedding:
    """Project ``X`` with LSP; deterministic for a given ``config.seed``."""
    return run_detailed(X, config, labels, **kwargs).embedding
