"""Recovery metrics, success classification, and per-configuration aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_matrix, frobenius_norm

SUCCESS_THRESHOLD = 1e-4
# log10 stand-in for an exactly zero error, safely below machine-precision recovery.
ZERO_ERROR_LOG = -16.0


def nrmse(X_hat, X_star) -> float:
    """Frobenius error of the estimate normalized by the truth's Frobenius norm."""
    X_hat = as_matrix(X_hat, "estimate")
    X_star = as_matrix(X_star, "truth")
    if X_hat.shape != X_star.shape:
        raise ValueError(f"shape mismatch: {X_hat.shape} vs {X_star.shape}")
    denom = frobenius_norm(X_star)
    if denom == 0.0:
        raise ValueError("ground truth is the zero matrix; NRMSE undefined")
    return frobenius_norm(X_hat - X_star) / denom


def log_nrmse(value: float) -> float:
    """log10 of the error, with a finite sentinel for an exact zero."""
    if value < 0:
        raise ValueError("nrmse must be nonnegative")
    if value == 0.0:
        return ZERO_ERROR_LOG
    return math.log10(value)


def classify(value: float) -> bool:
    """Success iff the error is strictly below the 1e-4 threshold."""
    if value < 0:
        raise ValueError("nrmse must be nonnegative")
    return value < SUCCESS_THRESHOLD


@dataclass(frozen=True)
class TrialRecord:
    scheme: str
    solver: str
    m: int
    n: int
    r: int
    trial: int
    seed: int
    observed_fraction: float
    nrmse: float
    log_nrmse: float
    success: bool
    outer_iterations: int
    runtime_ms: float

    def __post_init__(self):
        if self.success != classify(self.nrmse):
            raise ValueError("success flag inconsistent with the nrmse threshold")

    @classmethod
    def from_error(
        cls, scheme, solver, m, n, r, trial, seed, observed_fraction, error,
        outer_iterations, runtime_ms,
    ) -> "TrialRecord":
        """Build a record with the derived log/success fields filled in."""
        return cls(
            scheme=scheme,
            solver=solver,
            m=m,
            n=n,
            r=r,
            trial=trial,
            seed=seed,
            observed_fraction=observed_fraction,
            nrmse=error,
            log_nrmse=log_nrmse(error) if math.isfinite(error) else math.inf,
            success=classify(error),
            outer_iterations=outer_iterations,
            runtime_ms=runtime_ms,
        )

    @property
    def group_key(self) -> tuple:
        return (self.scheme, self.solver, self.m, self.n, self.r)


@dataclass(frozen=True)
class AggregateRecord:
    scheme: str
    solver: str
    m: int
    n: int
    r: int
    trial_count: int
    median_log_nrmse: float
    mean_log_nrmse: float
    success_rate: float


def aggregate(records: list[TrialRecord]) -> list[AggregateRecord]:
    """Group records by (scheme, solver, m, n, r) and summarize each group.

    Median and mean are taken over the finite log errors only; the success
    rate counts every trial in the group.
    """
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault(rec.group_key, []).append(rec)
    out = []
    for key in sorted(groups):
        recs = groups[key]
        finite = [r.log_nrmse for r in recs if math.isfinite(r.log_nrmse)]
        median = float(np.median(finite)) if finite else math.nan
        mean = float(np.mean(finite)) if finite else math.nan
        rate = sum(r.success for r in recs) / len(recs)
        out.append(AggregateRecord(*key, len(recs), median, mean, rate))
    return out
