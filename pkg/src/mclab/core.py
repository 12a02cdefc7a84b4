"""Core matrix types and elementary operations shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FactorPair",
    "ObservationSet",
    "SolverReport",
    "as_matrix",
    "frobenius_norm",
    "masked_frobenius_norm",
    "truncated_svd",
]


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite, nonempty 2-D float64 array.

    Raises ValueError for wrong dimensionality or NaN/Inf entries.
    """
    X = np.asarray(x, dtype=np.float64)
    if X.ndim != 2 or min(X.shape) < 1:
        raise ValueError(f"{name} must be a nonempty 2-D array, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return X


@dataclass(frozen=True)
class FactorPair:
    """A rank-r factorization X = U @ V.T with U of shape (m, r), V of shape (n, r)."""

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        U = as_matrix(self.U, "U")
        V = as_matrix(self.V, "V")
        if U.shape[1] != V.shape[1]:
            raise ValueError(f"factor ranks differ: U has {U.shape[1]}, V has {V.shape[1]}")
        if U.shape[1] > min(U.shape[0], V.shape[0]):
            raise ValueError("factor rank exceeds min(m, n)")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "V", V)

    @property
    def rank(self) -> int:
        return self.U.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.U.shape[0], self.V.shape[0])

    def product(self) -> np.ndarray:
        """Materialize U @ V.T."""
        return self.U @ self.V.T


@dataclass(frozen=True)
class ObservationSet:
    """A set of observed entries of an (m, n) matrix.

    Indices are stored as parallel ``rows``/``cols`` arrays sorted in
    row-major (lexicographic) order with no duplicates; ``values`` holds the
    observed entries in the same canonical order. This fixed layout makes
    the observed vector reproducible across runs.
    """

    shape: tuple[int, int]
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        m, n = self.shape
        if m < 1 or n < 1:
            raise ValueError(f"invalid shape {self.shape}")
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if not (rows.ndim == cols.ndim == values.ndim == 1):
            raise ValueError("rows, cols, values must be 1-D arrays")
        if not (rows.size == cols.size == values.size):
            raise ValueError("rows, cols, values must have equal length")
        if rows.size == 0:
            raise ValueError("observation set is empty")
        if rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n:
            raise ValueError("observation indices out of range")
        flat = rows * n + cols
        if np.any(np.diff(flat) <= 0):
            raise ValueError("observation indices must be strictly increasing row-major")
        if not np.isfinite(values).all():
            raise ValueError("observed values contain NaN or Inf")
        object.__setattr__(self, "shape", (int(m), int(n)))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_indices(cls, X, rows, cols) -> "ObservationSet":
        """Build an observation set from X and (possibly unsorted) index arrays."""
        X = as_matrix(X)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        order = np.argsort(rows * X.shape[1] + cols, kind="stable")
        rows, cols = rows[order], cols[order]
        return cls(X.shape, rows, cols, X[rows, cols])

    @classmethod
    def from_mask(cls, X, mask) -> "ObservationSet":
        """Build an observation set from a boolean mask (True = observed)."""
        X = as_matrix(X)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != X.shape:
            raise ValueError("mask shape does not match matrix shape")
        rows, cols = np.nonzero(mask)
        return cls(X.shape, rows, cols, X[rows, cols])

    @property
    def size(self) -> int:
        return int(self.rows.size)

    @property
    def fraction(self) -> float:
        """Observed fraction |Omega| / (m * n)."""
        m, n = self.shape
        return self.size / (m * n)

    def mask_matrix(self) -> np.ndarray:
        """Dense boolean mask with True at observed positions."""
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.rows, self.cols] = True
        return mask


@dataclass
class SolverReport:
    """Outcome of one completion run."""

    estimate: np.ndarray
    outer_iterations: int
    final_relative_residual: float
    converged: bool
    runtime_ms: float
    objective_trace: list[float] | None = field(default=None, repr=False)


def frobenius_norm(X) -> float:
    """Frobenius norm sqrt(sum of squared entries)."""
    return float(np.linalg.norm(as_matrix(X), "fro"))


def masked_frobenius_norm(X, omega: ObservationSet) -> float:
    """Frobenius norm restricted to the observed entries of ``omega``."""
    X = as_matrix(X)
    if X.shape != omega.shape:
        raise ValueError(f"matrix shape {X.shape} does not match mask shape {omega.shape}")
    return float(np.linalg.norm(X[omega.rows, omega.cols]))


def truncated_svd(X, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Best rank-k factors of X.

    Returns (U, s, V) with U of shape (m, k), s the k leading singular values
    in nonincreasing order, and V of shape (n, k), so that
    ``U @ np.diag(s) @ V.T`` is a best rank-k approximation of X.
    """
    X = as_matrix(X)
    if not 1 <= k <= min(X.shape):
        raise ValueError(f"k={k} out of range for shape {X.shape}")
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    return U[:, :k], s[:k], Vt[:k].T
