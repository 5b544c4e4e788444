"""Sparse representation classifier with a random Gaussian measurement step.

Training features are projected by one shared measurement matrix, normalized
to unit length and stacked class by class into a dictionary.  A test feature
goes through the same projection, is sparse-coded against the dictionary, and
is assigned to the class whose coefficients alone reconstruct it best.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyClass, InvalidSpec, UnknownLabel, ZeroVector
from .features import FeatureConfig, FeatureVector
from .solvers import (
    DEFAULT_TOL,
    MeasurementMatrix,
    SparseSolution,
    ista_l1,
    measurement_matrix,
    normalize_l2,
    omp,
    project,
)

SOLVERS = ("omp", "ista")


@dataclass(frozen=True)
class ClassifierConfig:
    m: int = 35
    k_max: int = 10
    tol: float = DEFAULT_TOL
    solver: str = "omp"
    lam: float = 0.01
    max_iter: int = 5000
    seed: int = 0
    measurement_mode: str = "gaussian"

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise InvalidSpec(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")
        if self.m < 1 or self.k_max < 1:
            raise InvalidSpec("m and k_max must be positive")


@dataclass(frozen=True, eq=False)
class Dictionary:
    atoms: np.ndarray  # (m, N), unit-norm columns, class-contiguous
    labels: np.ndarray  # (N,) class index per column
    classes: tuple[str, ...]
    phi: MeasurementMatrix
    clip_ids: tuple[str, ...] = ()
    feature_cfg: Optional[FeatureConfig] = None
    config_fingerprint: str = ""
    class_offsets: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        atoms = np.ascontiguousarray(self.atoms, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        atoms.flags.writeable = False
        labels.flags.writeable = False
        if atoms.shape != (self.phi.rows, labels.size):
            raise DimensionMismatch(f"atoms {atoms.shape} vs phi rows {self.phi.rows}, {labels.size} labels")
        if labels.size and np.any(np.diff(labels) < 0):
            raise InvalidSpec("dictionary columns must be grouped by class in class order")
        offsets = []
        for i in range(len(self.classes)):
            idx = np.flatnonzero(labels == i)
            offsets.append((int(idx[0]), int(idx[-1]) + 1) if idx.size else (0, 0))
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_offsets", tuple(offsets))

    @property
    def m(self) -> int:
        return self.atoms.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[1]

    @property
    def n_features(self) -> int:
        return self.phi.cols

    def class_counts(self) -> list[int]:
        return [hi - lo for lo, hi in self.class_offsets]


@dataclass
class ClassificationResult:
    predicted: str
    residuals: np.ndarray
    solution: SparseSolution
    margin: float

    @property
    def predicted_index(self) -> int:
        return int(np.argmin(self.residuals))


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, FeatureVector) else np.asarray(f, dtype=np.float64)


def measure(phi: MeasurementMatrix, feature) -> np.ndarray:
    """Random measurement followed by unit-l2 normalization."""
    v = _values(feature)
    try:
        return normalize_l2(project(phi, v))
    except ZeroVector:
        cid = getattr(feature, "clip_id", "")
        raise ZeroVector(f"feature {cid!r} measures to the zero vector") from None


def build_dictionary(
    features: Sequence[FeatureVector],
    labels: Sequence[str],
    m: int = 35,
    seed: int = 0,
    *,
    classes: Optional[Sequence[str]] = None,
    measurement_mode: str = "gaussian",
    feature_cfg: Optional[FeatureConfig] = None,
) -> Dictionary:
    if len(features) != len(labels):
        raise DimensionMismatch(f"{len(features)} features but {len(labels)} labels")
    if not features:
        raise EmptyClass("no training features")
    dims = {_values(f).size for f in features}
    if len(dims) != 1:
        raise DimensionMismatch(f"training features have mixed dimensions {sorted(dims)}")
    n = dims.pop()
    classes = tuple(sorted(set(labels))) if classes is None else tuple(classes)
    class_pos = {c: i for i, c in enumerate(classes)}
    unknown = set(labels) - set(class_pos)
    if unknown:
        raise UnknownLabel(f"labels not in class list: {sorted(unknown)}")
    counts = np.bincount([class_pos[c] for c in labels], minlength=len(classes))
    if np.any(counts == 0):
        empty = [classes[i] for i in np.flatnonzero(counts == 0)]
        raise EmptyClass(f"classes without training samples: {empty}")

    phi = measurement_matrix(m, n, seed, measurement_mode)
    order = sorted(range(len(labels)), key=lambda i: class_pos[labels[i]])
    atoms = np.empty((m, len(order)))
    for col, i in enumerate(order):
        atoms[:, col] = measure(phi, features[i])
    return Dictionary(
        atoms=atoms,
        labels=np.array([class_pos[labels[i]] for i in order]),
        classes=classes,
        phi=phi,
        clip_ids=tuple(getattr(features[i], "clip_id", "") for i in order),
        feature_cfg=feature_cfg,
        config_fingerprint=feature_cfg.fingerprint() if feature_cfg else "",
    )


def _solve(dictionary: Dictionary, y: np.ndarray, cfg: ClassifierConfig) -> SparseSolution:
    if cfg.solver == "ista":
        return ista_l1(dictionary.atoms, y, cfg.lam, max_iter=cfg.max_iter)
    # small dictionaries (learning-curve sizes of 1/class) cap the budget
    k = min(cfg.k_max, dictionary.m, dictionary.n_atoms)
    return omp(dictionary.atoms, y, k, cfg.tol)


def sparse_code(
    dictionary: Dictionary, feature, cfg: Optional[ClassifierConfig] = None
) -> SparseSolution:
    cfg = cfg or ClassifierConfig()
    if _values(feature).size != dictionary.n_features:
        raise DimensionMismatch(
            f"feature of dimension {_values(feature).size}, dictionary expects {dictionary.n_features}"
        )
    return _solve(dictionary, measure(dictionary.phi, feature), cfg)


def class_residuals(dictionary: Dictionary, y, sol: SparseSolution) -> np.ndarray:
    """``r_i = ||y - atoms @ delta_i(x)||`` with ``x`` masked to class ``i``."""
    x = np.asarray(sol.coefficients)
    if x.size != dictionary.n_atoms:
        raise DimensionMismatch(f"{x.size} coefficients for {dictionary.n_atoms} atoms")
    y = np.asarray(y, dtype=np.float64)
    out = np.empty(len(dictionary.classes))
    for i, (lo, hi) in enumerate(dictionary.class_offsets):
        out[i] = np.linalg.norm(y - dictionary.atoms[:, lo:hi] @ x[lo:hi])
    return out


def classify(
    dictionary: Dictionary, feature, cfg: Optional[ClassifierConfig] = None
) -> ClassificationResult:
    cfg = cfg or ClassifierConfig()
    if _values(feature).size != dictionary.n_features:
        raise DimensionMismatch(
            f"feature of dimension {_values(feature).size}, dictionary expects {dictionary.n_features}"
        )
    y = measure(dictionary.phi, feature)
    sol = _solve(dictionary, y, cfg)
    residuals = class_residuals(dictionary, y, sol)
    best = int(np.argmin(residuals))
    ranked = np.sort(residuals)
    margin = float(ranked[1] - ranked[0]) if ranked.size > 1 else 0.0
    return ClassificationResult(dictionary.classes[best], residuals, sol, margin)
