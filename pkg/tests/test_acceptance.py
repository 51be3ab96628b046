"""Acceptance checks; a per-criterion PASS/FAIL summary is printed at the end of the run."""

import itertools
import os
import time

import numpy as np
import pytest

from projlab import lsp, metrics, pca, tsne
from projlab.dataset import pairwise_distances, squared_euclidean
from projlab.lsp import LspConfig
from projlab.metrics import Embedding
from projlab.numerics import classical_mds, k_medoids, medoid_cost
from projlab.sweep import parse_config, sweep
from projlab.synthetic import gaussian_blobs, informative_plus_noise
from projlab.tsne import TsneConfig

from test_metrics import naive_silhouette
from test_tsne import fd_gradient, random_joint

criterion = pytest.mark.criterion


@pytest.fixture(scope="module")
def blobs10():
    return gaussian_blobs(10, 100, dim=10, separation=10.0, seed=0)


@pytest.fixture(scope="module")
def lsp_grid10(blobs10):
    X, y = blobs10
    return {
        (cp, nn): lsp.run(X, LspConfig(cp, nn), labels=y)
        for cp in (25, 50, 75)
        for nn in (10, 20)
    }


@pytest.fixture(scope="module")
def tsne10(blobs10):
    X, y = blobs10
    return tsne.run(X, TsneConfig(perplexity=40, iterations=1500), labels=y)


@criterion(1, "t-SNE gradient matches central differences")
def test_gradient_finite_differences():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    for _ in range(10):
        P = random_joint(8, rng)
        Y = rng.normal(size=(8, 2))
        G = tsne.gradient(P, tsne.low_dim_affinities(Y), Y)
        ref = fd_gradient(P, Y)
        rel = np.abs(G - ref) / np.maximum(np.abs(ref), 1e-8)
        assert rel.max() <= 1e-4
    assert time.perf_counter() - start < 5


@criterion(2, "perplexity calibration on a 200-point blob set")
def test_perplexity_calibration():
    X, _ = gaussian_blobs(4, 50, dim=10, seed=2)
    D2 = squared_euclidean(X)
    start = time.perf_counter()
    for target in (5, 20, 30, 40):
        sigmas = tsne.calibrate_sigmas(D2, target)
        achieved = tsne.achieved_perplexities(D2, sigmas)
        assert np.max(np.abs(achieved - target)) <= 1e-3
    assert time.perf_counter() - start < 5


def _assert_distribution(M):
    assert np.array_equal(M, M.T)
    assert np.all(np.diag(M) == 0)
    assert abs(M.sum() - 1) <= 1e-9


@criterion(3, "P and Q are symmetric, unit-mass, zero-diagonal")
@pytest.mark.parametrize("perplexity,distance", [(5, "euclidean"), (30, "euclidean"), (15, "cosine")])
def test_affinity_normalization(perplexity, distance):
    X, y = gaussian_blobs(3, 40, dim=6, seed=3)
    X = X + 1.0
    cfg = TsneConfig(perplexity=perplexity, iterations=200)
    res = tsne.run_detailed(X, cfg, labels=y, distance=distance)
    _assert_distribution(res.P)
    _assert_distribution(tsne.low_dim_affinities(res.embedding.coords))


@criterion(4, "LSP sparse solve matches the dense pseudoinverse")
@pytest.mark.parametrize("seed", range(20))
def test_lsp_solver_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(12, 51))
    nc = int(rng.integers(3, 11))
    k = int(rng.integers(2, min(10, n - 1)))
    res = lsp.run_detailed(rng.normal(size=(n, 5)), LspConfig(nc, k, seed=seed))
    A = res.system.A.toarray()
    assert np.linalg.matrix_rank(A) == n
    ref = np.linalg.pinv(A) @ res.system.b
    assert np.max(np.abs(res.embedding.coords - ref)) <= 1e-6
    assert np.max(np.abs(A[:n].sum(axis=1))) <= 1e-12


@criterion(5, "k-medoids cost against exhaustive enumeration")
def test_k_medoids_oracle():
    rng = np.random.default_rng(5)
    for trial in range(10):
        n, k = int(rng.integers(4, 13)), int(rng.integers(1, 4))
        D = pairwise_distances(rng.normal(size=(n, 2)))
        best = min(medoid_cost(D, c) for c in itertools.combinations(range(n), k))
        assert k_medoids(D, k, seed=trial).cost <= 1.05 * best
    for trial in range(5):
        X, _ = gaussian_blobs(3, 4, dim=3, separation=20.0, seed=trial)
        D = pairwise_distances(X)
        best = min(medoid_cost(D, c) for c in itertools.combinations(range(12), 3))
        assert k_medoids(D, 3, seed=trial).cost == best


@criterion(6, "classical MDS on the unit square and two points")
def test_classical_mds():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    D = pairwise_distances(square)
    assert np.max(np.abs(pairwise_distances(classical_mds(D, 2)) - D)) <= 1e-9
    two = classical_mds(np.array([[0.0, 7.0], [7.0, 0.0]]), 1)
    np.testing.assert_allclose(np.sort(two[:, 0]), [-3.5, 3.5], atol=1e-12)


@criterion(7, "3-blob benchmark for both methods")
def test_blob_benchmark(blobs3):
    X, y = blobs3
    start = time.perf_counter()
    t = tsne.run(X, TsneConfig(perplexity=20, iterations=1000), labels=y)
    l = lsp.run(X, LspConfig(25, 10), labels=y)
    elapsed = time.perf_counter() - start
    assert metrics.silhouette(t) >= 0.7
    assert metrics.silhouette(l) >= 0.5
    for emb in (t, l):
        assert metrics.neighborhood_hit_curve(emb, 10)[9] >= 0.95
    assert elapsed < 30


@criterion(8, "t-SNE beats LSP on 10 blobs")
def test_method_ordering_silhouette(tsne10, lsp_grid10):
    best_lsp = max(metrics.silhouette(e) for e in lsp_grid10.values())
    assert metrics.silhouette(tsne10) > best_lsp


@criterion(8, "t-SNE beats LSP on 10 blobs")
def test_method_ordering_hit_curve(tsne10, lsp_grid10):
    t = metrics.neighborhood_hit_curve(tsne10, 30)
    for emb in lsp_grid10.values():
        assert np.all(t >= metrics.neighborhood_hit_curve(emb, 30))


@criterion(9, "LSP silhouette does not rise from 25 to 75 control points")
@pytest.mark.parametrize("nn", [10, 20])
def test_control_point_trend(lsp_grid10, nn):
    assert metrics.silhouette(lsp_grid10[25, nn]) >= metrics.silhouette(lsp_grid10[75, nn])


@criterion(10, "40 PCA dims beat 20 before t-SNE")
def test_pca_pipeline_trend():
    X, y = informative_plus_noise()
    cfg = TsneConfig(perplexity=30, iterations=1000)
    short = metrics.silhouette(tsne.run(X, cfg, pca_dims=20, labels=y))
    long = metrics.silhouette(tsne.run(X, cfg, pca_dims=40, labels=y))
    assert long >= short


@criterion(11, "silhouette against a double-loop reference")
def test_silhouette_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(4, 201))
        X = rng.normal(size=(n, int(rng.integers(1, 4))))
        labels = rng.integers(0, int(rng.integers(2, 6)), size=n)
        labels[:2] = [0, 1]
        got = metrics.silhouette(Embedding(X, labels))
        assert abs(got - naive_silhouette(X, labels)) <= 1e-12
    hand = Embedding(np.array([[0.0], [1.0], [10.0], [11.0]]), [0, 0, 1, 1])
    assert abs(metrics.silhouette(hand) - 0.8997) <= 1e-4


@criterion(12, "sweep reruns are byte-identical")
@pytest.mark.parametrize("method,grid", [
    ("lsp", {"control_points": "5,10", "neighbors": "4,8"}),
    ("tsne", {"perplexity": "10,20", "iterations": "300", "pca_dims": "none,3"}),
])
def test_sweep_determinism(tmp_path, method, grid):
    rng = np.random.default_rng(12)
    X = np.vstack([rng.normal(loc=c, size=(25, 5)) for c in (0.0, 6.0)])
    data = tmp_path / "data.csv"
    lines = ["a,b,c,d,e,label"] + [",".join(f"{v:.17g}" for v in x) + f",g{i // 25}" for i, x in enumerate(X)]
    data.write_text("\n".join(lines) + "\n")

    def once(out):
        sweep(parse_config(overrides={"input": str(data), "method": method, "output": str(out), **grid}))
        return {p.name: p.read_bytes() for p in out.iterdir() if p.suffix == ".csv"}

    first, second = once(tmp_path / "a"), once(tmp_path / "b")
    assert "report.csv" in first and len(first) == 2 + 4
    assert first == second


@criterion(13, "user-supplied image features reproduce the method orderings")
@pytest.mark.skipif(not os.environ.get("PROJLAB_FEATURES_CSV"), reason="set PROJLAB_FEATURES_CSV to a feature CSV")
def test_real_feature_orderings(tmp_path):
    path = os.environ["PROJLAB_FEATURES_CSV"]
    label = os.environ.get("PROJLAB_FEATURES_LABEL", "label")
    lsp_rows = sweep(parse_config(overrides={
        "input": path, "label_column": label, "method": "lsp", "output": str(tmp_path / "lsp"),
        "control_points": "25,50,75", "neighbors": "10,20"}))
    tsne_rows = sweep(parse_config(overrides={
        "input": path, "label_column": label, "method": "tsne", "output": str(tmp_path / "tsne"),
        "perplexity": "20,30,40", "iterations": "1000,1500"}))
    lsp_scores = {(r.params["control_points"], r.params["neighbors"]): r.silhouette for r, _ in lsp_rows}
    tsne_scores = [r.silhouette for r, _ in tsne_rows]
    for r, _ in lsp_rows + tsne_rows:
        print(r.method, r.params, r.silhouette)
    assert None not in lsp_scores.values() and None not in tsne_scores
    assert min(tsne_scores) > max(lsp_scores.values())
    for nn in (10, 20):
        assert lsp_scores[25, nn] >= lsp_scores[75, nn]
