"""Gaussian measurement matrices and sparse solvers (OMP, ISTA)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _backend
from .errors import BadColumns, BadShape, DimensionMismatch, InvalidSpec, ZeroVector

UNIT_NORM_TOL = 1e-9
DEFAULT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    entries: np.ndarray
    seed: int
    mode: str = "gaussian"

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.float64)
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@dataclass
class SparseSolution:
    coefficients: np.ndarray
    residual_norm: float
    iterations: int
    residual_history: list = field(default_factory=list)
    rank_deficient: bool = False
    converged: bool = True
    objective_history: list = field(default_factory=list)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.coefficients)


def _check_shape(m: int, n: int) -> None:
    if m < 1 or n < 1 or m >= n:
        raise BadShape(f"measurement matrix must satisfy 1 <= m < n, got {m}x{n}")


def gaussian_matrix(m: int, n: int, seed: int) -> MeasurementMatrix:
    """i.i.d. N(0, 1/m) entries, fully determined by ``(m, n, seed)``."""
    _check_shape(m, n)
    rng = np.random.default_rng(seed)
    return MeasurementMatrix(rng.standard_normal((m, n)) / np.sqrt(m), seed, "gaussian")


def subsample_matrix(m: int, n: int, seed: int) -> MeasurementMatrix:
    """Selection matrix picking ``m`` distinct coordinates (sorted) at random."""
    _check_shape(m, n)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=m, replace=False))
    entries = np.zeros((m, n))
    entries[np.arange(m), idx] = 1.0
    return MeasurementMatrix(entries, seed, "coordinate_subsample")


def measurement_matrix(m: int, n: int, seed: int, mode: str = "gaussian") -> MeasurementMatrix:
    if mode == "gaussian":
        return gaussian_matrix(m, n, seed)
    if mode == "coordinate_subsample":
        return subsample_matrix(m, n, seed)
    raise InvalidSpec(f"unknown measurement mode {mode!r}")


def project(phi: MeasurementMatrix, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != phi.cols:
        raise DimensionMismatch(f"vector of length {v.shape[0]} vs matrix with {phi.cols} columns")
    return phi.entries @ v


def normalize_l2(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.isfinite(norm):
        raise ZeroVector("cannot normalize a zero vector")
    return v / norm


def normalize_columns(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise ZeroVector(f"zero columns at {np.flatnonzero(norms == 0).tolist()}")
    return A / norms


def check_unit_columns(A, tol: float = UNIT_NORM_TOL) -> None:
    norms = np.linalg.norm(A, axis=0)
    bad = np.flatnonzero(np.abs(norms - 1.0) > tol)
    if bad.size:
        raise BadColumns(
            f"{bad.size} column(s) are not unit norm (first: {bad[0]}, norm {norms[bad[0]]:.6g})"
        )


def _omp_lstsq(A, y, k_max, abs_tol):
    """Reference OMP re-solving least squares from scratch with a min-norm solver.

    Used when the Cholesky path meets a (numerically) dependent atom.
    """
    m, n = A.shape
    support: list[int] = []
    selected = np.zeros(n, dtype=bool)
    coef = np.zeros(0)
    r = y.copy()
    history = [float(np.linalg.norm(r))]
    for _ in range(k_max):
        if history[-1] <= abs_tol:
            break
        corr = np.abs(A.T @ r)
        corr[selected] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 0.0:
            break
        support.append(j)
        selected[j] = True
        coef = np.linalg.lstsq(A[:, support], y, rcond=None)[0]
        r = y - A[:, support] @ coef
        history.append(float(np.linalg.norm(r)))
    return np.asarray(support, dtype=np.int64), coef, r, np.asarray(history)


def omp(
    A,
    y,
    k_max: int,
    tol: float = DEFAULT_TOL,
    backend: Optional[str] = None,
) -> SparseSolution:
    """Orthogonal Matching Pursuit.

    Each iteration adds the unused column most correlated with the residual
    (lowest index on ties), refits the support coefficients by least squares
    and updates the residual.  Stops after ``k_max`` atoms or once
    ``||r|| <= tol * ||y||``.

    Columns of ``A`` must already be unit norm.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise DimensionMismatch(f"A is {A.shape}, y is {y.shape}")
    m, n = A.shape
    if not 1 <= k_max <= min(m, n):
        raise InvalidSpec(f"k_max must lie in [1, {min(m, n)}], got {k_max}")
    check_unit_columns(A)
    abs_tol = tol * float(np.linalg.norm(y))

    kern = _backend.get_kernels(backend)
    support, coef, r, history, rank_deficient = kern.omp_kernel(A, y, int(k_max), abs_tol)
    if rank_deficient:
        support, coef, r, history = _omp_lstsq(A, y, k_max, abs_tol)

    x = np.zeros(n)
    x[support] = coef
    return SparseSolution(
        coefficients=x,
        residual_norm=float(np.linalg.norm(r)),
        iterations=int(len(support)),
        residual_history=[float(h) for h in history],
        rank_deficient=bool(rank_deficient),
    )


def spectral_norm_sq(A, n_iter: int = 100, seed: int = 0) -> float:
    """Power iteration estimate of the largest eigenvalue of ``A^T A``."""
    v = np.random.default_rng(seed).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(n_iter):
        w = A.T @ (A @ v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - est) <= 1e-12 * new:
            est = new
            break
        est = new
    return est


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def l1_objective(A, y, x, lam) -> float:
    r = y - A @ x
    return 0.5 * float(r @ r) + lam * float(np.abs(x).sum())


def ista_l1(
    A,
    y,
    lam: float,
    max_iter: int = 5000,
    tol: float = 1e-10,
    support_eps: float = 1e-8,
) -> SparseSolution:
    """Iterative shrinkage-thresholding for ``0.5||y - Ax||^2 + lam ||x||_1``.

    The step is ``1/L`` with ``L`` a power-iteration estimate of ``||A||_2^2``
    inflated by 1% so it bounds the true value.  Entries with
    ``|x_i| <= support_eps`` are zeroed in the returned solution.
    """
    if lam <= 0:
        raise InvalidSpec(f"lambda must be positive, got {lam}")
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise DimensionMismatch(f"A is {A.shape}, y is {y.shape}")
    check_unit_columns(A)
    L = 1.01 * spectral_norm_sq(A)
    if L == 0.0:
        L = 1.0
    step = 1.0 / L
    x = np.zeros(A.shape[1])
    history = [l1_objective(A, y, x, lam)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = A.T @ (A @ x - y)
        x_new = soft_threshold(x - step * grad, lam * step)
        delta = float(np.max(np.abs(x_new - x)))
        x = x_new
        history.append(l1_objective(A, y, x, lam))
        if delta < tol:
            converged = True
            break
    x = np.where(np.abs(x) > support_eps, x, 0.0)
    return SparseSolution(
        coefficients=x,
        residual_norm=float(np.linalg.norm(y - A @ x)),
        iterations=it,
        converged=converged,
        objective_history=history,
    )
