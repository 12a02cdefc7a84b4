"""Seeded synthetic ground-truth generation.

Two families are supported: low-rank products of i.i.d. standard normal
factors, and products of i.i.d. Uniform[0, 1] factors rescaled affinely so
the entries span [1, 5] exactly (a ratings-style matrix). All randomness
comes from NumPy's PCG64 generator seeded per call, so generation is a pure
function of the spec.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FactorPair

GAUSSIAN_FACTORS = "gaussian-factors"
UNIFORM_RESCALED = "uniform-rescaled"
FAMILIES = (GAUSSIAN_FACTORS, UNIFORM_RESCALED)

RATING_MIN = 1.0
RATING_MAX = 5.0


@dataclass(frozen=True)
class DataGenSpec:
    m: int
    n: int
    r: int
    family: str
    seed: int

    def __post_init__(self):
        if min(self.m, self.n, self.r) < 1:
            raise ValueError("m, n, r must be positive")
        if self.r > min(self.m, self.n):
            raise ValueError(f"rank {self.r} exceeds min({self.m}, {self.n})")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")


def generate_gaussian_lowrank(spec: DataGenSpec) -> tuple[np.ndarray, FactorPair]:
    """Draw U (m, r) and V (n, r) with standard normal entries; return (U @ V.T, factors)."""
    if spec.family != GAUSSIAN_FACTORS:
        raise ValueError(f"spec family is {spec.family!r}, not {GAUSSIAN_FACTORS!r}")
    rng = np.random.default_rng(spec.seed)
    U = rng.standard_normal((spec.m, spec.r))
    V = rng.standard_normal((spec.n, spec.r))
    truth = FactorPair(U, V)
    return truth.product(), truth


def generate_ratings_matrix(spec: DataGenSpec) -> tuple[np.ndarray, FactorPair]:
    """Draw Uniform[0, 1] factors and rescale their product onto [1, 5].

    The affine map 1 + 4 * (P - min) / (max - min) hits both endpoints
    exactly and raises the rank by at most one (the constant shift).
    """
    if spec.family != UNIFORM_RESCALED:
        raise ValueError(f"spec family is {spec.family!r}, not {UNIFORM_RESCALED!r}")
    rng = np.random.default_rng(spec.seed)
    U = rng.random((spec.m, spec.r))
    V = rng.random((spec.n, spec.r))
    truth = FactorPair(U, V)
    P = truth.product()
    lo, hi = P.min(), P.max()
    if hi == lo:
        raise ValueError("degenerate factor product: all entries equal, cannot rescale")
    X = RATING_MIN + (RATING_MAX - RATING_MIN) * (P - lo) / (hi - lo)
    return X, truth


def generate(spec: DataGenSpec) -> tuple[np.ndarray, FactorPair]:
    """Dispatch on the spec family."""
    if spec.family == GAUSSIAN_FACTORS:
        return generate_gaussian_lowrank(spec)
    return generate_ratings_matrix(spec)
