"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` operation for operation and are used when the
compiled extension is unavailable (or ``SPARSEGENRE_BACKEND=python``).
"""
import numpy as np
from scipy.linalg import solve_triangular

# relative pivot below which a new atom is treated as lying in the span of the support
RANK_EPS = 1e-10


def normalized_row_stats(mags):
    """Per-row max normalization of a magnitude matrix.

    Returns ``(row_sums, col_means)`` of the normalized matrix.  Rows whose
    maximum is zero normalize to all zeros.
    """
    mags = np.asarray(mags, dtype=np.float64)
    peak = mags.max(axis=1, keepdims=True)
    safe = np.where(peak > 0, peak, 1.0)
    normed = np.where(peak > 0, mags / safe, 0.0)
    return normed.sum(axis=1), normed.mean(axis=0)


def omp_kernel(A, y, k_max, abs_tol):
    """Greedy OMP with an incrementally updated Cholesky factor of A_S^T A_S.

    Returns ``(support, coef, residual, history, rank_deficient)`` where
    ``history[i]`` is the residual norm after ``i`` atoms.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m, n = A.shape
    L = np.zeros((k_max, k_max))
    b = np.zeros(k_max)
    support = []
    coef = np.zeros(0)
    r = y.copy()
    history = [float(np.sqrt(r @ r))]
    selected = np.zeros(n, dtype=bool)
    rank_deficient = False

    for s in range(k_max):
        if history[-1] <= abs_tol:
            break
        corr = np.abs(A.T @ r)
        corr[selected] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 0.0:
            break
        aj = A[:, j]
        ajj = float(aj @ aj)
        if s:
            v = A[:, support].T @ aj
            w = solve_triangular(L[:s, :s], v, lower=True)
            d = ajj - float(w @ w)
        else:
            w = np.zeros(0)
            d = ajj
        if d <= RANK_EPS * ajj:
            rank_deficient = True
            break
        L[s, :s] = w
        L[s, s] = np.sqrt(d)
        b[s] = aj @ y
        support.append(j)
        selected[j] = True
        z = solve_triangular(L[: s + 1, : s + 1], b[: s + 1], lower=True)
        coef = solve_triangular(L[: s + 1, : s + 1].T, z, lower=False)
        r = y - A[:, support] @ coef
        history.append(float(np.sqrt(r @ r)))

    return (
        np.asarray(support, dtype=np.int64),
        np.asarray(coef, dtype=np.float64),
        r,
        np.asarray(history),
        rank_deficient,
    )
