"""The four completion solvers.

Two proximal methods minimize the nuclear-norm regularized least-squares
objective mu * |X|_* + 0.5 * |P_omega(X) - b|^2 with a decreasing
regularization schedule (fpca: plain fixed-point iteration; nnls: FISTA
momentum). Two factorization methods solve a linearized least-squares
subproblem per outer iteration through the lifted operators and LSQR
(r2rils: rank-2r subspace averaging; gnmr: Gauss-Newton with the minimum
norm step). All four are deterministic given the observations and config.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .core import ObservationSet, SolverReport, as_matrix, truncated_svd
from .linops import (
    lifted_operator_gnmr,
    lifted_operator_r2rils,
    lsqr_least_norm,
    project_omega,
    scatter_omega,
    split_stacked_factors,
)

FPCA = "fpca"
NNLS = "nnls"
R2RILS = "r2rils"
GNMR = "gnmr"
SOLVERS = (FPCA, NNLS, R2RILS, GNMR)


@dataclass(frozen=True)
class ShrinkageConfig:
    """Parameters of the proximal solvers.

    ``mu_final`` is the floor of the regularization weight; the schedule
    starts at ``mu_init`` (the largest singular value of the zero-filled
    observed matrix when None) and shrinks by ``eta`` whenever the iterate
    stalls at the current level, i.e. its relative change drops below
    ``xtol``. The run ends when the iterate stalls at the floor level or
    after ``max_iter`` total iterations. ``tau`` is the gradient step size.

    ``gap_ratio`` enables the rank truncation used by the reference
    shrinkage solvers: after soft-thresholding, the spectrum is cut at the
    most pronounced singular-value gap (ratio >= gap_ratio). This keeps the
    iterates genuinely low rank, which is what lets these methods converge
    within their iteration budgets; None disables it and leaves the pure
    soft-threshold step.
    """

    xtol: float
    max_iter: int
    mu_final: float = 1e-8
    tau: float = 1.0
    eta: float = 0.25
    mu_init: float | None = None
    gap_ratio: float | None = 5.0
    track_objective: bool = False

    def __post_init__(self):
        if self.xtol <= 0 or self.mu_final <= 0 or self.tau <= 0:
            raise ValueError("tolerances and step sizes must be positive")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.gap_ratio is not None and self.gap_ratio <= 1.0:
            raise ValueError("gap_ratio must exceed 1")


FPCA_CONFIG = ShrinkageConfig(xtol=1e-6, max_iter=500)
NNLS_CONFIG = ShrinkageConfig(xtol=1e-4, max_iter=100)


@dataclass(frozen=True)
class R2rilsConfig:
    max_outer_iter: int = 40
    max_inner_iter: int = 150
    rtol: float = 1e-11

    def __post_init__(self):
        if self.max_outer_iter < 1 or self.max_inner_iter < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.rtol <= 0:
            raise ValueError("rtol must be positive")


@dataclass(frozen=True)
class GnmrConfig:
    """Gauss-Newton solver parameters.

    With ``adaptive_inner_tol`` the LSQR tolerance tightens to the squared
    outer residual once the iterate is close (residual below 1e-5), which
    preserves the quadratic convergence of the outer iteration down to
    machine precision; the inner iteration cap still applies.
    """

    max_outer_iter: int = 100
    max_inner_iter: int = 2000
    rtol: float = 1e-11
    update_weight: float = 1.0
    adaptive_inner_tol: bool = True

    def __post_init__(self):
        if self.max_outer_iter < 1 or self.max_inner_iter < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.rtol <= 0:
            raise ValueError("rtol must be positive")
        if not 0.0 < self.update_weight <= 1.0:
            raise ValueError("update_weight must lie in (0, 1]")


R2RILS_CONFIG = R2rilsConfig()
GNMR_CONFIG = GnmrConfig()


def svt(X, theta: float) -> np.ndarray:
    """Soft-threshold the singular values of X by theta.

    This is the proximal map of theta * |X|_*: singular values shrink to
    max(sigma - theta, 0) while the singular vectors are kept.
    """
    X = as_matrix(X)
    if theta <= 0:
        raise ValueError("theta must be positive")
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    s = np.maximum(s - theta, 0.0)
    keep = s > 0.0
    if not keep.any():
        return np.zeros_like(X)
    return (U[:, keep] * s[keep]) @ Vt[keep]


def _nuclear_norm(X) -> float:
    return float(np.linalg.svd(X, compute_uv=False).sum())


def _shrink_step(W: np.ndarray, theta: float, gap_ratio: float | None) -> np.ndarray:
    """One shrinkage step: soft-threshold, then optionally cut at a spectral gap."""
    U, s, Vt = np.linalg.svd(W, full_matrices=False)
    p = int(np.count_nonzero(s > theta))
    if gap_ratio is not None and p >= 2:
        head = s[:p]
        ratios = head[:-1] / head[1:]
        i = int(np.argmax(ratios))
        if ratios[i] >= gap_ratio:
            p = i + 1
    if p == 0:
        return np.zeros_like(W)
    return (U[:, :p] * (s[:p] - theta)) @ Vt[:p]


def _proximal_solve(omega: ObservationSet, cfg: ShrinkageConfig, accelerated: bool) -> SolverReport:
    start = time.perf_counter()
    b = omega.values
    bnorm = float(np.linalg.norm(b))
    zero_fill = scatter_omega(b, omega)
    mu_floor = cfg.mu_final
    if cfg.mu_init is not None:
        mu = max(cfg.mu_init, mu_floor)
    else:
        mu = max(float(np.linalg.norm(zero_fill, 2)), mu_floor)

    X = np.zeros(omega.shape)
    X_prev = X
    t_momentum = 1.0
    trace: list[float] | None = [] if cfg.track_objective else None
    converged = False
    iters = 0

    while iters < cfg.max_iter:
        if accelerated:
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_momentum * t_momentum))
            Y = X + ((t_momentum - 1.0) / t_next) * (X - X_prev)
            t_momentum = t_next
        else:
            Y = X
        grad = scatter_omega(project_omega(Y, omega) - b, omega)
        X_new = _shrink_step(Y - cfg.tau * grad, cfg.tau * mu, cfg.gap_ratio)
        iters += 1
        rel_change = float(np.linalg.norm(X_new - X, "fro")) / max(
            1.0, float(np.linalg.norm(X, "fro"))
        )
        X_prev = X
        X = X_new
        if trace is not None:
            residual = project_omega(X, omega) - b
            trace.append(mu * _nuclear_norm(X) + 0.5 * float(residual @ residual))
        if rel_change < cfg.xtol:
            if mu <= mu_floor:
                converged = True
                break
            mu = max(mu_floor, cfg.eta * mu)
            if accelerated:
                # Fresh momentum for the new regularization level.
                t_momentum = 1.0
                X_prev = X

    final_residual = float(np.linalg.norm(project_omega(X, omega) - b)) / bnorm
    runtime_ms = (time.perf_counter() - start) * 1e3
    return SolverReport(X, iters, final_residual, converged, runtime_ms, trace)


def fpca_solve(omega: ObservationSet, cfg: ShrinkageConfig = FPCA_CONFIG) -> SolverReport:
    """Fixed-point shrinkage iteration with a decreasing regularization schedule.

    The target rank is not an input: the estimate's rank emerges from the
    shrinkage and the data-driven spectral-gap cut (see
    ``ShrinkageConfig.gap_ratio``). An exact SVD backs every step.
    """
    return _proximal_solve(omega, cfg, accelerated=False)


def nnls_solve(omega: ObservationSet, cfg: ShrinkageConfig = NNLS_CONFIG) -> SolverReport:
    """Accelerated proximal gradient (FISTA) on the same objective as fpca_solve."""
    return _proximal_solve(omega, cfg, accelerated=True)


def _check_sample_budget(omega: ObservationSet, rank: int):
    m, n = omega.shape
    if rank < 1 or rank > min(m, n):
        raise ValueError(f"rank {rank} out of range for shape {omega.shape}")
    dof = rank * (m + n - rank)
    if omega.size < dof:
        raise ValueError(
            f"{omega.size} observations cannot determine a rank-{rank} matrix "
            f"with {dof} degrees of freedom"
        )


def _normalize_columns(M: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(M, axis=0)
    safe = np.where(norms > 0.0, norms, 1.0)
    return M / safe


def r2rils_update(U, V, A, B) -> tuple[np.ndarray, np.ndarray]:
    """Average the current factors with the column-normalized corrections.

    Each correction column is rescaled to unit norm and added to the factor
    column it is paired with, and the sums are normalized back to unit
    columns. The factors are deliberately not re-orthogonalized: a QR pass
    would mix the columns and break the pairing between the row-space and
    column-space estimates that the averaging relies on.
    """
    U_next = _normalize_columns(_normalize_columns(U) + _normalize_columns(A))
    V_next = _normalize_columns(_normalize_columns(V) + _normalize_columns(B))
    return U_next, V_next


def r2rils_solve(
    omega: ObservationSet,
    rank: int,
    cfg: R2rilsConfig = R2RILS_CONFIG,
    init: tuple[np.ndarray, np.ndarray] | None = None,
) -> SolverReport:
    """Iterative least squares over a rank-2r lift of the current subspaces.

    Starting from the leading singular subspaces of the zero-filled observed
    matrix, each outer iteration solves for the minimum-norm corrections
    (A, B) of the masked least-squares problem on U @ B.T + A @ V.T, forms
    the rank-<=2r estimate, and averages the factor columns with the
    normalized corrections. The returned estimate is the best rank-r
    approximation of the last lifted estimate.
    """
    start = time.perf_counter()
    _check_sample_budget(omega, rank)
    m, n = omega.shape
    b = omega.values
    bnorm = float(np.linalg.norm(b))

    if init is not None:
        U, V = as_matrix(init[0], "init U"), as_matrix(init[1], "init V")
    else:
        U, _, V = truncated_svd(scatter_omega(b, omega), rank)

    Z = None
    relres = math.inf
    converged = False
    iters = 0
    for _ in range(cfg.max_outer_iter):
        op = lifted_operator_r2rils(U, V, omega)
        outcome = lsqr_least_norm(op, b, cfg.max_inner_iter, cfg.rtol)
        A, B = split_stacked_factors(outcome.solution, m, n, rank)
        Z = U @ B.T + A @ V.T
        iters += 1
        relres = float(np.linalg.norm(project_omega(Z, omega) - b)) / bnorm
        if relres < cfg.rtol:
            converged = True
            break
        U, V = r2rils_update(U, V, A, B)

    Uz, sz, Vz = truncated_svd(Z, rank)
    estimate = (Uz * sz) @ Vz.T
    final_residual = float(np.linalg.norm(project_omega(estimate, omega) - b)) / bnorm
    runtime_ms = (time.perf_counter() - start) * 1e3
    return SolverReport(estimate, iters, final_residual, converged, runtime_ms)


def rebalance_factors(U, V) -> tuple[np.ndarray, np.ndarray]:
    """Re-split the scale between the factors without changing U @ V.T.

    Thin QR of each factor followed by an SVD of the small r x r core
    spreads the singular values evenly (sqrt on each side), which keeps the
    minimum-norm steps of later iterations well scaled.
    """
    Qu, Ru = np.linalg.qr(U)
    Qv, Rv = np.linalg.qr(V)
    W, s, Zt = np.linalg.svd(Ru @ Rv.T)
    scale = np.sqrt(s)
    return (Qu @ W) * scale, (Qv @ Zt.T) * scale


def gnmr_solve(
    omega: ObservationSet,
    rank: int,
    cfg: GnmrConfig = GNMR_CONFIG,
    init: tuple[np.ndarray, np.ndarray] | None = None,
) -> SolverReport:
    """Gauss-Newton iteration on the factorized completion problem.

    Each outer iteration linearizes X = U @ V.T around the current factors
    and solves the masked least-squares problem on
    U_t @ V.T + U @ V_t.T = b + P_omega(U_t @ V_t.T) for the minimum-norm
    new factors, which are then rebalanced. Iteration stops once the masked
    relative residual of the current factors drops below ``cfg.rtol``. The
    spectral initialization rescales the zero-filled matrix by the observed
    fraction (it estimates the full matrix only up to that factor), and the
    reported estimate is the best-residual iterate, which guards against a
    diverging late step on hard instances.
    """
    start = time.perf_counter()
    _check_sample_budget(omega, rank)
    m, n = omega.shape
    b = omega.values
    bnorm = float(np.linalg.norm(b))

    if init is not None:
        U, V = as_matrix(init[0], "init U"), as_matrix(init[1], "init V")
    else:
        U0, s0, V0 = truncated_svd(scatter_omega(b, omega) / omega.fraction, rank)
        scale = np.sqrt(s0)
        U, V = U0 * scale, V0 * scale

    def masked_relres(U, V):
        fitted = np.einsum("kr,kr->k", U[omega.rows], V[omega.cols])
        return float(np.linalg.norm(fitted - b)) / bnorm

    relres = masked_relres(U, V)
    best_relres, best_U, best_V = relres, U, V
    converged = relres < cfg.rtol
    iters = 0
    while not converged and iters < cfg.max_outer_iter:
        inner_tol = cfg.rtol
        if cfg.adaptive_inner_tol and relres < 1e-5:
            inner_tol = min(inner_tol, relres * relres)
        op = lifted_operator_gnmr(U, V, omega)
        rhs = b + np.einsum("kr,kr->k", U[omega.rows], V[omega.cols])
        outcome = lsqr_least_norm(op, rhs, cfg.max_inner_iter, inner_tol)
        U_new, V_new = split_stacked_factors(outcome.solution, m, n, rank)
        if cfg.update_weight != 1.0:
            w = cfg.update_weight
            U_new = (1.0 - w) * U + w * U_new
            V_new = (1.0 - w) * V + w * V_new
        U, V = rebalance_factors(U_new, V_new)
        iters += 1
        relres = masked_relres(U, V)
        if relres < best_relres:
            best_relres, best_U, best_V = relres, U, V
        converged = relres < cfg.rtol

    estimate = best_U @ best_V.T
    runtime_ms = (time.perf_counter() - start) * 1e3
    return SolverReport(estimate, iters, best_relres, converged, runtime_ms)
