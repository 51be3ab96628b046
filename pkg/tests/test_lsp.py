import itertools

import numpy as np
import pytest

from projlab import lsp, metrics
from projlab.dataset import pairwise_distances
from projlab.lsp import (
    ControlPointSet,
    LspConfig,
    assemble_system,
    build_neighborhoods,
    exact_neighborhoods,
    points_without_control,
    project_control_points,
    select_control_points,
)
from projlab.numerics import MedoidAssignment, RankDeficientError, medoid_cost


def small_blobs(per=10, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0, 0.0], [30.0, 0.0, 0.0], [0.0, 30.0, 0.0]])
    return np.vstack([c + rng.normal(size=(per, 3)) for c in centers]), np.repeat(np.arange(3), per)


def test_all_points_are_control_points(rng):
    D = pairwise_distances(rng.normal(size=(8, 2)))
    idx, clusters = select_control_points(D, 8)
    np.testing.assert_array_equal(np.sort(idx), np.arange(8))
    assert clusters.cost == 0


def test_one_control_point_per_blob():
    X, y = small_blobs()
    D = pairwise_distances(X)
    idx, clusters = select_control_points(D, 3, seed=5)
    assert sorted(y[idx].tolist()) == [0, 1, 2]
    best = min(medoid_cost(D, c) for c in itertools.combinations(range(30), 3))
    assert clusters.cost == pytest.approx(best, abs=1e-12)


def test_project_two_control_points():
    coords = project_control_points(np.array([[0.0, 3.0], [3.0, 0.0]]), 1)
    np.testing.assert_allclose(np.sort(coords[:, 0]), [-1.5, 1.5], atol=1e-12)


def test_project_square():
    D = pairwise_distances(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))
    coords = project_control_points(D, 2)
    assert np.max(np.abs(pairwise_distances(coords) - D)) <= 1e-9


def test_project_blob_control_points_keep_groups(blobs3):
    X, y = blobs3
    D = pairwise_distances(X)
    idx, _ = select_control_points(D, 25, seed=0)
    coords = project_control_points(D[np.ix_(idx, idx)], 2)
    groups = y[idx]
    means = np.array([coords[groups == g].mean(axis=0) for g in range(3)])
    spread = max(np.linalg.norm(coords[groups == g] - means[g], axis=1).max() for g in range(3))
    separation = min(np.linalg.norm(means[a] - means[b]) for a, b in itertools.combinations(range(3), 2))
    assert len(set(groups.tolist())) == 3
    assert separation > spread


def test_project_degenerate():
    with pytest.raises(ValueError, match="degenerate"):
        project_control_points(np.zeros((4, 4)), 2)


def test_neighborhoods_on_line():
    D = pairwise_distances(np.array([[0.0], [1.0], [10.0], [11.0]]))
    clusters = MedoidAssignment(np.array([0, 2]), np.array([0, 0, 1, 1]), 2.0)
    graph = build_neighborhoods(D, clusters, 1)
    assert graph[0].tolist() == [1]
    assert graph[2].tolist() == [3]


def test_neighborhoods_fall_back_to_everyone(rng):
    D = pairwise_distances(rng.normal(size=(9, 2)))
    _, clusters = select_control_points(D, 4, seed=1)
    graph = build_neighborhoods(D, clusters, 8)
    for i, nb in enumerate(graph):
        assert sorted(nb.tolist()) == [j for j in range(9) if j != i]


def test_neighborhoods_match_exact_knn_when_clusters_follow_blobs(blobs3):
    X, _ = blobs3
    D = pairwise_distances(X)
    _, clusters = select_control_points(D, 3, seed=0)
    graph = build_neighborhoods(D, clusters, 10)
    exact = exact_neighborhoods(D, 10)
    same = np.mean([np.array_equal(a, b) for a, b in zip(graph, exact)])
    assert same >= 0.95


def test_neighborhood_graph_invariants(blobs3):
    X, _ = blobs3
    D = pairwise_distances(X)
    _, clusters = select_control_points(D, 25, seed=0)
    for i, nb in enumerate(build_neighborhoods(D, clusters, 10)):
        assert len(nb) == 10 and i not in nb and len(set(nb.tolist())) == 10


def test_assemble_chain_by_hand():
    graph = [np.array([1]), np.array([0, 2]), np.array([1])]
    system = assemble_system(graph, ControlPointSet(np.array([1]), np.array([[2.0, -1.0]])), 3)
    expected = np.array([[1, -1, 0], [-0.5, 1, -0.5], [0, -1, 1], [0, 1, 0]], dtype=float)
    np.testing.assert_array_equal(system.A.toarray(), expected)
    np.testing.assert_array_equal(system.b, [[0, 0], [0, 0], [0, 0], [2, -1]])


def test_assembled_rows_sum_to_zero(blobs3):
    X, _ = blobs3
    res = lsp.run_detailed(X[::2], LspConfig(10, 7))
    A = res.system.A
    n = A.shape[1]
    assert np.max(np.abs(np.asarray(A[:n].sum(axis=1)).ravel())) <= 1e-12
    C = A[n:].toarray()
    assert np.all(C.sum(axis=1) == 1)
    np.testing.assert_array_equal(np.argmax(C, axis=1), res.controls.indices)


def test_all_controls_give_identity_block(rng):
    X = rng.normal(size=(12, 3))
    res = lsp.run_detailed(X, LspConfig(12, 3))
    order = res.controls.indices
    C = res.system.A[12:].toarray()
    np.testing.assert_array_equal(C[np.argsort(order)], np.eye(12))


def test_all_controls_solution_is_exact_least_squares(rng):
    X = rng.normal(size=(20, 4))
    res = lsp.run_detailed(X, LspConfig(20, 3))
    A = res.system.A.toarray()
    ref = np.linalg.lstsq(A, res.system.b, rcond=None)[0]
    assert np.max(np.abs(res.embedding.coords - ref)) <= 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_residual_matches_dense_pseudoinverse(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(15, 51))
    X = rng.normal(size=(n, 4))
    res = lsp.run_detailed(X, LspConfig(int(rng.integers(3, 11)), int(rng.integers(2, 8)), seed=seed))
    A = res.system.A.toarray()
    for j in range(2):
        b = res.system.b[:, j]
        ref = np.linalg.pinv(A) @ b
        r_ours = np.sum((A @ res.embedding.coords[:, j] - b) ** 2)
        r_ref = np.sum((A @ ref - b) ** 2)
        assert abs(r_ours - r_ref) <= 1e-8
        assert np.max(np.abs(res.embedding.coords[:, j] - ref)) <= 1e-6


def test_point_lands_on_coincident_neighbors():
    # points 0..2 are controls at the same spot; point 3 only sees them
    graph = [np.array([1]), np.array([0]), np.array([0]), np.array([0, 1, 2])]
    controls = ControlPointSet(np.array([0, 1, 2]), np.tile([[1.5, -2.0]], (3, 1)))
    system = assemble_system(graph, controls, 4)
    Y = lsp.solve_system(system, graph, controls)
    np.testing.assert_allclose(Y[3], [1.5, -2.0], atol=1e-9)


def test_orphan_component_reported():
    graph = [np.array([1]), np.array([0]), np.array([3]), np.array([2])]
    controls = ControlPointSet(np.array([0]), np.array([[1.0, 1.0]]))
    assert points_without_control(graph, controls.indices, 4).tolist() == [2, 3]
    system = assemble_system(graph, controls, 4)
    with pytest.raises(RankDeficientError, match=r"points \[2, 3\]"):
        lsp.solve_system(system, graph, controls)


def test_blob_benchmark(blobs3):
    X, y = blobs3
    emb = lsp.run(X, LspConfig(25, 10), labels=y)
    assert metrics.silhouette(emb) >= 0.5


def test_deterministic(blobs3):
    X, y = blobs3
    a = lsp.run(X, LspConfig(20, 8, seed=4), labels=y)
    b = lsp.run(X, LspConfig(20, 8, seed=4), labels=y)
    assert np.array_equal(a.coords, b.coords)


def test_cosine_distance(blobs3):
    X, y = blobs3
    emb = lsp.run(X + 1.0, LspConfig(10, 8, distance="cosine"), labels=y)
    assert np.all(np.isfinite(emb.coords))


def test_config_validation():
    with pytest.raises(ValueError):
        LspConfig(2, 5).validate(50)
    with pytest.raises(ValueError):
        LspConfig(10, 50).validate(50)
    with pytest.raises(ValueError):
        LspConfig(60, 5).validate(50)
