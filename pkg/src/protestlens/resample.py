"""SMOTE oversampling of the minority class to exact parity.

Operates on flattened embedding features. Synthetic rows are convex
interpolations between a minority row and one of its k nearest minority
neighbors (Euclidean). The RNG is Philox (64-bit counter-based), so a given
seed reproduces the same output on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FeatureMatrix", "nearest_neighbors", "smote"]


@dataclass
class FeatureMatrix:
    """N x D feature rows with parallel binary labels."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {self.X.shape}")
        if self.y.shape != (self.X.shape[0],):
            raise ValueError("labels must align with rows")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("features contain non-finite values")
        if not np.all(np.isin(self.y, (0, 1))):
            raise ValueError("labels must be 0 or 1")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def class_counts(self) -> tuple[int, int]:
        ones = int(self.y.sum())
        return self.n - ones, ones


def nearest_neighbors(X: np.ndarray, i: int, k: int) -> np.ndarray:
    """Indices of the k nearest rows to row i (Euclidean), excluding i.

    Ties break toward the lower index.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"row index {i} out of range for {n} rows")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= n:
        raise ValueError(f"k={k} requires at least k+1={k + 1} rows, have {n}")
    d2 = np.sum((X - X[i]) ** 2, axis=1)
    d2[i] = np.inf
    order = np.argsort(d2, kind="stable")
    return order[:k]


def smote(fm: FeatureMatrix, k: int = 5, seed: int = 0) -> FeatureMatrix:
    """Append synthetic minority rows until both classes have equal counts.

    Each synthetic row is x + lam * (x_nn - x) with lam ~ U[0,1], x a
    uniformly drawn minority row and x_nn one of its k nearest minority
    neighbors. Originals are returned unchanged as a prefix, in their input
    order. Already balanced input comes back as-is.
    """
    zeros, ones = fm.class_counts()
    if zeros == 0 or ones == 0:
        raise ValueError("SMOTE requires both classes present")
    if zeros == ones:
        return FeatureMatrix(fm.X.copy(), fm.y.copy())

    minority_label = 1 if ones < zeros else 0
    minority_idx = np.flatnonzero(fm.y == minority_label)
    n_min = minority_idx.shape[0]
    if n_min < k + 1:
        raise ValueError(
            f"minority class has {n_min} rows; SMOTE with k={k} needs at least {k + 1} "
            "(use a smaller --smote-k)"
        )
    minority = fm.X[minority_idx]
    neighbor_table = np.stack([nearest_neighbors(minority, i, k) for i in range(n_min)])

    deficit = abs(zeros - ones)
    rng = np.random.Generator(np.random.Philox(seed))
    synthetic = np.empty((deficit, fm.X.shape[1]), dtype=np.float64)
    for row in range(deficit):
        src = int(rng.integers(0, n_min))
        nn = int(neighbor_table[src, int(rng.integers(0, k))])
        lam = rng.random()
        synthetic[row] = minority[src] + lam * (minority[nn] - minority[src])

    X = np.vstack([fm.X, synthetic])
    y = np.concatenate([fm.y, np.full(deficit, minority_label, dtype=np.int64)])
    return FeatureMatrix(X, y)
