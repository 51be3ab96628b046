"""Numerical kernels shared by the projections.

Symmetric eigendecomposition, classical (Torgerson) MDS, alternating
k-medoids and a conjugate-gradient least-squares solver for sparse systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class ConvergenceError(RuntimeError):
    """An iterative routine stopped without meeting its tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class RankDeficientError(np.linalg.LinAlgError):
    """The least-squares system does not have full column rank."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class MedoidAssignment:
    medoid_indices: np.ndarray
    assignment: np.ndarray
    cost: float
    cost_history: tuple[float, ...] = ()

    @property
    def n_clusters(self) -> int:
        return len(self.medoid_indices)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cluster)


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so that its entry of largest magnitude is positive.

    Ties in magnitude resolve to the lowest row index.
    """
    vectors = np.array(vectors, dtype=np.float64)
    if vectors.size == 0:
        return vectors
    rows = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[rows, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def symmetric_eigen(M, k: int | None = None, *, sym_tol: float = 1e-9) -> EigenResult:
    """Top-``k`` eigenpairs of a real symmetric matrix, eigenvalues descending.

    Eigenvectors are unit length and sign-normalized with :func:`fix_signs`.
    Raises ``ValueError`` for a non-symmetric input and
    :class:`ConvergenceError` if any returned pair fails
    ``|Mv - lv| <= 1e-6 max(1, |l|)``.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    n = M.shape[0]
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    asym = np.max(np.abs(M - M.T))
    if asym > sym_tol * max(1.0, np.max(np.abs(M))):
        raise ValueError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
    M = 0.5 * (M + M.T)

    w, V = np.linalg.eigh(M)
    order = np.argsort(-w, kind="stable")[:k]
    w, V = w[order], fix_signs(V[:, order])

    residual = np.linalg.norm(M @ V - V * w, axis=0)
    bound = 1e-6 * np.maximum(1.0, np.abs(w))
    if np.any(residual > bound):
        worst = int(np.argmax(residual / bound))
        raise ConvergenceError(f"eigenpair {worst} failed the residual check", float(residual[worst]))
    return EigenResult(w, V)


def double_center(S) -> np.ndarray:
    """``J S J`` with ``J = I - 11^T/n``, computed without forming ``J``."""
    S = np.asarray(S, dtype=np.float64)
    B = S - S.mean(axis=0, keepdims=True)
    B = B - B.mean(axis=1, keepdims=True)
    return 0.5 * (B + B.T)


def classical_mds(D, d: int = 2, *, full_output: bool = False):
    """Classical multidimensional scaling of a distance matrix.

    Parameters
    ----------
    D : (n, n) array
        Symmetric distance matrix with zero diagonal.
    d : int
        Target dimension; needs ``n >= d + 1``.
    full_output : bool
        Also return the top-``d`` eigenvalues of the Gram matrix and a flag
        that is set when ``D`` is identically zero.

    Returns
    -------
    Y : (n, d) array
        Coordinates centered at the origin. Axes whose eigenvalue is not
        positive collapse to zero.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    if D.ndim != 2 or D.shape[1] != n:
        raise ValueError(f"expected a square distance matrix, got shape {D.shape}")
    if d < 1 or n < d + 1:
        raise ValueError(f"need d >= 1 and n >= d + 1, got n={n}, d={d}")

    if not np.any(D):
        Y, w, degenerate = np.zeros((n, d)), np.zeros(d), True
    else:
        B = -0.5 * double_center(D**2)
        eig = symmetric_eigen(B, d)
        w = eig.eigenvalues
        Y = eig.eigenvectors * np.sqrt(np.clip(w, 0.0, None))
        Y -= Y.mean(axis=0)
        degenerate = False
    if full_output:
        return Y, w, degenerate
    return Y


def medoid_cost(D, medoids) -> float:
    """Sum over points of the distance to the nearest of ``medoids``."""
    D = np.asarray(D)
    return float(D[:, np.asarray(medoids)].min(axis=1).sum())


def _assign(D: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    # medoids are kept sorted, so argmin's first-hit rule picks the lowest index
    labels = np.argmin(D[:, medoids], axis=1)
    labels[medoids] = np.arange(len(medoids))
    return labels


def _k_medoids_once(D: np.ndarray, medoids: np.ndarray, max_rounds: int):
    medoids = np.sort(medoids)
    labels = _assign(D, medoids)
    history = [float(D[np.arange(len(D)), medoids[labels]].sum())]
    for _ in range(max_rounds):
        new = medoids.copy()
        for c in range(len(medoids)):
            members = np.flatnonzero(labels == c)
            within = D[np.ix_(members, members)].sum(axis=1)
            new[c] = members[np.argmin(within)]
        new = np.sort(new)
        new_labels = _assign(D, new)
        cost = float(D[np.arange(len(D)), new[new_labels]].sum())
        assert cost <= history[-1] * (1 + 1e-12), "k-medoids cost increased"
        if np.array_equal(new, medoids):
            break
        medoids, labels = new, new_labels
        history.append(cost)
    return medoids, labels, history


def k_medoids(D, k: int, seed: int = 0, *, n_init: int = 20, max_rounds: int = 100) -> MedoidAssignment:
    """Alternating (Voronoi iteration) k-medoids on a precomputed distance matrix.

    Each restart draws ``k`` distinct random medoids from a generator seeded
    with ``seed``, then alternates nearest-medoid assignment with replacing
    each medoid by the member of its cluster with the smallest summed
    in-cluster distance, until the medoids stop changing or ``max_rounds``
    is reached. The cheapest of ``n_init`` restarts is returned; ties go to
    the earliest restart. Cluster ids follow the sorted medoid indices.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    if D.ndim != 2 or D.shape[1] != n:
        raise ValueError(f"expected a square distance matrix, got shape {D.shape}")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, n={n}], got {k}")
    if n_init < 1:
        raise ValueError("n_init must be positive")

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init if k < n else 1):
        start = rng.choice(n, size=k, replace=False)
        medoids, labels, history = _k_medoids_once(D, start, max_rounds)
        if best is None or history[-1] < best[2][-1]:
            best = (medoids, labels, history)
    medoids, labels, history = best
    return MedoidAssignment(medoids, labels, history[-1], tuple(history))


def _cg_normal(A: sp.csr_matrix, At: sp.csr_matrix, rhs: np.ndarray, rtol: float, max_iter: int) -> np.ndarray:
    rhs_norm = np.linalg.norm(rhs)
    x = np.zeros(A.shape[1])
    if rhs_norm == 0.0:
        return x
    scale = max(1.0, float(np.abs(A.data).max()) ** 2) if A.nnz else 1.0
    r = rhs.copy()
    p = r.copy()
    rr = r @ r
    tol = rtol * rhs_norm
    for _ in range(max_iter):
        Ap = At @ (A @ p)
        curvature = p @ Ap
        if curvature <= 1e-14 * (p @ p) * scale:
            raise RankDeficientError("normal equations are singular", float(np.sqrt(rr) / rhs_norm))
        alpha = rr / curvature
        x += alpha * p
        r -= alpha * Ap
        rr_new = r @ r
        if np.sqrt(rr_new) <= tol:
            # the recurrence can drift from the true residual; confirm before accepting
            r = rhs - At @ (A @ x)
            rr_new = r @ r
            if np.sqrt(rr_new) <= tol:
                return x
            p = r.copy()
        else:
            p = r + (rr_new / rr) * p
        rr = rr_new
    final = np.linalg.norm(rhs - At @ (A @ x)) / rhs_norm
    raise RankDeficientError(f"CG did not reach rtol={rtol:g} in {max_iter} iterations", float(final))


def sparse_least_squares(
    A, b, *, rtol: float = 1e-10, max_iter: int | None = None, check_rank: bool = False
) -> np.ndarray:
    """Minimize ``|Ax - b|^2`` via conjugate gradients on ``A^T A x = A^T b``.

    Stops once ``|A^T A x - A^T b| <= rtol |A^T b|``; the iteration cap
    defaults to ten times the number of unknowns. ``A^T A`` is never formed.

    Raises :class:`RankDeficientError` on a CG breakdown or when the cap is
    reached. A singular but consistent system can still converge, so with
    ``check_rank`` a second solve against a random right-hand side is run;
    its null-space component cannot be reduced and the residual stagnates.
    Empty columns are always rejected.
    """
    A = sp.csr_matrix(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m, n = A.shape
    if b.shape != (m,):
        raise ValueError(f"b has shape {b.shape}, expected ({m},)")
    if not (np.all(np.isfinite(A.data)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite entries in A or b")
    At = A.T.tocsr()
    empty = np.flatnonzero(np.diff(A.tocsc().indptr) == 0)
    if empty.size:
        raise RankDeficientError(f"column {empty[0]} of A is empty", float("nan"))
    max_iter = 10 * n if max_iter is None else max_iter

    x = _cg_normal(A, At, At @ b, rtol, max_iter)
    if check_rank:
        probe = np.random.default_rng(0).standard_normal(n)
        _cg_normal(A, At, probe, rtol, max_iter)
    return x
