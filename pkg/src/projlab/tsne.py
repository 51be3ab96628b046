"""Exact t-SNE: perplexity calibration, joint affinities and KL minimization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import pca as _pca
from .dataset import DistanceKind, as_data_matrix, pairwise_distances, squared_euclidean
from .metrics import Embedding

log = logging.getLogger(__name__)

P_FLOOR = 1e-12
DUPLICATE_EPS = 1e-12


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    exaggeration_factor: float = 4.0
    exaggeration_iters: int = 100
    out_dim: int = 2
    init_scale: float = 1e-2
    seed: int = 0

    def validate(self, n: int | None = None) -> None:
        if not self.perplexity > 1:
            raise ValueError(f"perplexity must exceed 1, got {self.perplexity}")
        if n is not None and not self.perplexity < n:
            raise ValueError(f"perplexity must be below n={n}, got {self.perplexity}")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        for name in ("momentum_initial", "momentum_final"):
            if not 0 <= getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.momentum_switch_iter < 0:
            raise ValueError("momentum_switch_iter must be non-negative")
        if not self.exaggeration_factor >= 1:
            raise ValueError("exaggeration_factor must be >= 1")
        if not 0 <= self.exaggeration_iters <= self.iterations:
            raise ValueError("exaggeration_iters must lie in [0, iterations]")
        if self.out_dim < 1:
            raise ValueError("out_dim must be positive")
        if not self.init_scale > 0:
            raise ValueError("init_scale must be positive")


@dataclass
class TsneResult:
    embedding: Embedding
    sigmas: np.ndarray
    P: np.ndarray
    cost_history: list[float] = field(default_factory=list)


def _log_conditionals(D2: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Row-wise log p_{j|i} for a stack of squared-distance rows; inf entries give -inf."""
    logits = -D2 / (2.0 * sigma[:, None] ** 2)
    top = logits.max(axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        shifted = logits - top
    shifted[np.isnan(shifted)] = -np.inf
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def _perplexity(logp: np.ndarray) -> np.ndarray:
    p = np.exp(logp)
    with np.errstate(invalid="ignore"):
        terms = np.where(p > 0, p * logp, 0.0)
    return 2.0 ** (-terms.sum(axis=1) / np.log(2.0))


def _masked_rows(D2: np.ndarray) -> np.ndarray:
    rows = np.array(D2, dtype=np.float64)
    np.fill_diagonal(rows, np.inf)
    return rows


def conditional_probabilities(d2_row, sigma: float, self_index: int | None = None) -> np.ndarray:
    """Gaussian neighbor probabilities of one point.

    ``d2_row`` holds squared distances from the point to every point; the
    entry at ``self_index`` is excluded and set to zero. Infinite distances
    get probability zero. The row sums to one.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    row = np.array(d2_row, dtype=np.float64)
    if row.ndim != 1 or np.any(np.isnan(row)) or np.any(row < 0):
        raise ValueError("squared distances must be a 1-D array of non-negative values")
    if self_index is not None:
        row[self_index] = np.inf
    if np.all(np.isinf(row)):
        raise ValueError("degenerate row: every neighbor is at infinite distance")
    return np.exp(_log_conditionals(row[None, :], np.array([float(sigma)]))[0])


def calibrate_sigmas(
    D2, perplexity: float, *, tol: float = 1e-5, max_bisections: int = 200, max_doublings: int = 200
) -> np.ndarray:
    """Per-point Gaussian widths whose conditional rows reach ``perplexity``.

    Each row brackets sigma by doubling or halving from 1, then bisects
    (geometrically) until ``|2^H - perplexity| <= tol`` or ``max_bisections``
    steps. Zero off-diagonal distances are lifted to ``1e-12`` so duplicate
    points stay separable.
    """
    D2 = np.asarray(D2, dtype=np.float64)
    n = D2.shape[0]
    if D2.ndim != 2 or D2.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {D2.shape}")
    if not 1 < perplexity < n:
        raise ValueError(f"perplexity must lie in (1, n={n}), got {perplexity}")
    rows = _masked_rows(D2)
    rows[rows == 0] = DUPLICATE_EPS

    def perp(sig, idx):
        return _perplexity(_log_conditionals(rows[idx], sig))

    sigma = np.ones(n)
    cur = perp(sigma, np.arange(n))
    done = np.abs(cur - perplexity) <= tol
    lo = np.where(cur < perplexity, sigma, 0.0)
    hi = np.where(cur > perplexity, sigma, np.inf)

    # bracket: perplexity grows monotonically with sigma
    for _ in range(max_doublings):
        need_up = ~done & np.isinf(hi)
        need_down = ~done & (lo == 0)
        todo = np.flatnonzero(need_up | need_down)
        if todo.size == 0:
            break
        trial = np.where(need_up[todo], sigma[todo] * 2.0, sigma[todo] * 0.5)
        p = perp(trial, todo)
        sigma[todo] = trial
        hit = np.abs(p - perplexity) <= tol
        done[todo[hit]] = True
        below = p < perplexity
        lo[todo[below]] = trial[below]
        hi[todo[~below]] = trial[~below]
    else:
        stuck = np.flatnonzero(~done & (np.isinf(hi) | (lo == 0)))
        if stuck.size:
            raise ValueError(f"perplexity {perplexity} unreachable for row {stuck[0]}")

    for _ in range(max_bisections):
        todo = np.flatnonzero(~done)
        if todo.size == 0:
            break
        mid = np.sqrt(lo[todo] * hi[todo])
        p = perp(mid, todo)
        sigma[todo] = mid
        hit = np.abs(p - perplexity) <= tol
        done[todo[hit]] = True
        below = p < perplexity
        lo[todo[below]] = mid[below]
        hi[todo[~below]] = mid[~below]
    if not done.all():
        miss = np.flatnonzero(~done)
        achieved = perp(sigma[miss], miss)
        worst = int(np.argmax(np.abs(achieved - perplexity)))
        if abs(achieved[worst] - perplexity) > 1e-4:
            raise ValueError(
                f"perplexity calibration failed for row {miss[worst]}: reached {achieved[worst]:.6f}"
            )
    return sigma


def conditional_matrix(D2, sigmas) -> np.ndarray:
    """All rows of conditional probabilities for squared distances ``D2``."""
    rows = _masked_rows(D2)
    rows[rows == 0] = DUPLICATE_EPS
    return np.exp(_log_conditionals(rows, np.asarray(sigmas, dtype=np.float64)))


def achieved_perplexities(D2, sigmas) -> np.ndarray:
    rows = _masked_rows(D2)
    rows[rows == 0] = DUPLICATE_EPS
    return _perplexity(_log_conditionals(rows, np.asarray(sigmas, dtype=np.float64)))


def joint_affinities(conditionals) -> np.ndarray:
    """Symmetrize conditional rows into ``p_ij = (p_{j|i} + p_{i|j}) / 2n``."""
    C = np.asarray(conditionals, dtype=np.float64)
    n = C.shape[0]
    P = (C + C.T) / (2.0 * n)
    np.fill_diagonal(P, 0.0)
    return P


def _student_kernel(Y: np.ndarray) -> np.ndarray:
    """``(1 + |y_i - y_j|^2)^-1`` with zero diagonal, exactly symmetric."""
    n = Y.shape[0]
    num = np.ones((n, n))
    diff = np.empty((n, n))
    for k in range(Y.shape[1]):
        np.subtract.outer(Y[:, k], Y[:, k], out=diff)
        diff *= diff
        num += diff
    np.reciprocal(num, out=num)
    np.fill_diagonal(num, 0.0)
    return num


def low_dim_affinities(Y) -> np.ndarray:
    """Student-t affinities normalized over all ordered pairs ``k != l``."""
    Y = np.asarray(Y, dtype=np.float64)
    num = _student_kernel(Y)
    return num / num.sum()


def kl_cost(P, Q) -> float:
    """``sum p_ij ln(p_ij / q_ij)`` over ``i != j``; zero ``p`` terms vanish, ``q`` floored at 1e-12."""
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    mask = P > 0
    np.fill_diagonal(mask, False)
    p = P[mask]
    q = np.maximum(Q[mask], P_FLOOR)
    return float(np.sum(p * np.log(np.maximum(p, P_FLOOR) / q)))


def _gradient(P: np.ndarray, num: np.ndarray, Y: np.ndarray, want_q: bool = False):
    # W = (P - Q) * num, built in place
    W = num * (1.0 / num.sum())
    Q = W.copy() if want_q else None
    np.subtract(P, W, out=W)
    W *= num
    return 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y), Q


def gradient(P, Q, Y) -> np.ndarray:
    """Gradient of :func:`kl_cost` with respect to the embedding ``Y``.

    ``4 sum_j (p_ij - q_ij)(y_i - y_j)(1 + |y_i - y_j|^2)^-1``; ``Q`` must
    come from the same ``Y``.
    """
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    W = (P - Q) * _student_kernel(Y)
    return 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y)


def input_affinities(X, perplexity: float, distance=DistanceKind.EUCLIDEAN):
    """Calibrated widths and joint affinity matrix for data ``X``."""
    if DistanceKind(distance) is DistanceKind.EUCLIDEAN:
        D2 = squared_euclidean(X)
    else:
        D2 = pairwise_distances(X, distance) ** 2
    sigmas = calibrate_sigmas(D2, perplexity)
    return sigmas, joint_affinities(conditional_matrix(D2, sigmas))


def check_affinity(M, name: str = "affinity", tol: float = 1e-9) -> None:
    """Raise ``AssertionError`` unless ``M`` is symmetric, zero-diagonal and sums to one."""
    M = np.asarray(M)
    assert np.array_equal(M, M.T), f"{name} matrix is not symmetric"
    assert not np.any(np.diag(M)), f"{name} matrix has a nonzero diagonal"
    assert abs(M.sum() - 1.0) <= tol, f"{name} matrix sums to {M.sum()!r}"
    assert np.all(M >= 0) and np.all(M <= 1), f"{name} entries leave [0, 1]"


def run_detailed(
    X,
    config: TsneConfig = TsneConfig(),
    pca_dims: int | None = None,
    labels=None,
    label_names=None,
    distance=DistanceKind.EUCLIDEAN,
    track_cost: bool = False,
    callback=None,
) -> TsneResult:
    """Like :func:`run` but also returns widths, ``P`` and (optionally) the KL cost per iteration.

    ``callback(iteration, Y)`` is invoked after every update.
    """
    X = as_data_matrix(X)
    n = X.shape[0]
    config.validate(n)
    if pca_dims is not None:
        if not 1 <= pca_dims <= X.shape[1]:
            raise ValueError(f"pca_dims must be in [1, {X.shape[1]}], got {pca_dims}")
        X, _ = _pca.fit_transform(X, pca_dims)

    sigmas, P = input_affinities(X, config.perplexity, distance)
    check_affinity(P, "P")

    rng = np.random.default_rng(config.seed)
    Y = rng.normal(0.0, config.init_scale, size=(n, config.out_dim))
    Y -= Y.mean(axis=0)
    velocity = np.zeros_like(Y)
    costs = []

    P_exag = P * config.exaggeration_factor
    for it in range(config.iterations):
        P_used = P_exag if it < config.exaggeration_iters else P
        momentum = config.momentum_initial if it < config.momentum_switch_iter else config.momentum_final
        num = _student_kernel(Y)
        grad, Q = _gradient(P_used, num, Y, want_q=track_cost)
        if track_cost:
            costs.append(kl_cost(P, Q))
        velocity = momentum * velocity - config.learning_rate * grad
        Y = Y + velocity
        Y -= Y.mean(axis=0)
        if not np.all(np.isfinite(Y)):
            raise FloatingPointError(f"embedding diverged at iteration {it}")
        if callback is not None:
            callback(it, Y)
    Q = low_dim_affinities(Y)
    check_affinity(Q, "Q")
    if track_cost:
        costs.append(kl_cost(P, Q))
    log.debug("t-SNE finished %d iterations on %d points", config.iterations, n)

    if labels is None:
        labels = np.zeros(n, dtype=np.int64)
    emb = Embedding(Y, labels, list(label_names or []))
    return TsneResult(emb, sigmas, P, costs)


def run(X, config: TsneConfig = TsneConfig(), pca_dims: int | None = None, labels=None, **kwargs) -> Embedding:
    """Embed ``X`` with t-SNE, optionally after reducing it to ``pca_dims`` principal components.

    Deterministic for a given ``config.seed``.
    """
    return run_detailed(X, config, pca_dims, labels, **kwargs).embedding
