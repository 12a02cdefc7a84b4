"""Masked projection, lifted factorization operators, and an LSQR solver.

The lifted operators realize the linearized subproblems of the two
factorization solvers. Both map a stacked pair of factor corrections to the
observed entries of the corresponding rank-2r perturbation, and both are
backed by one sparse matrix with 2r nonzeros per observed entry, built once
per operator. The stacked unknown is laid out column-major: the (m, r) block
first, then the (n, r) block; this layout is part of the contract because it
fixes the coordinates of the minimum-norm solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse

from .core import ObservationSet, as_matrix

STOP_TOLERANCE = "tolerance"
STOP_ITERATION_CAP = "iteration-cap"
STOP_BREAKDOWN = "breakdown"


@dataclass(frozen=True)
class LinearOperator:
    """A linear map given by matching apply / apply_adjoint callables."""

    input_dim: int
    output_dim: int
    apply: Callable[[np.ndarray], np.ndarray]
    apply_adjoint: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def from_matrix(cls, M) -> "LinearOperator":
        M = np.asarray(M, dtype=np.float64)
        return cls(M.shape[1], M.shape[0], lambda x: M @ x, lambda y: M.T @ y)


def materialize(op: LinearOperator) -> np.ndarray:
    """Dense matrix of the operator, column by column. For small instances only."""
    cols = [op.apply(col) for col in np.eye(op.input_dim)]
    return np.column_stack(cols)


def project_omega(X, omega: ObservationSet) -> np.ndarray:
    """Extract the observed entries of X as a vector in canonical mask order."""
    X = as_matrix(X)
    if X.shape != omega.shape:
        raise ValueError(f"matrix shape {X.shape} does not match mask shape {omega.shape}")
    return X[omega.rows, omega.cols]


def scatter_omega(v, omega: ObservationSet, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Place vector v at the observed positions, zeros elsewhere (adjoint of project)."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (omega.size,):
        raise ValueError(f"vector length {v.shape} does not match mask size {omega.size}")
    if shape is not None and tuple(shape) != omega.shape:
        raise ValueError(f"requested shape {shape} does not match mask shape {omega.shape}")
    X = np.zeros(omega.shape)
    X[omega.rows, omega.cols] = v
    return X


def _lifted_sparse(U_t, V_t, omega: ObservationSet) -> sparse.csr_matrix:
    """Sparse |Omega| x r(m+n) matrix of the shared lifted map.

    Row k (for observed index (i, j)) holds V_t[j, :] against the first
    factor block and U_t[i, :] against the second, so matrix-vector products
    evaluate the observed entries of (first @ V_t.T + U_t @ second.T).
    """
    m, r = U_t.shape
    n = V_t.shape[0]
    k = omega.size
    lane = np.arange(r, dtype=np.int64)
    col_first = lane[None, :] * m + omega.rows[:, None]
    col_second = m * r + lane[None, :] * n + omega.cols[:, None]
    cols = np.hstack([col_first, col_second]).ravel()
    rows = np.repeat(np.arange(k, dtype=np.int64), 2 * r)
    data = np.hstack([V_t[omega.cols], U_t[omega.rows]]).ravel()
    return sparse.csr_matrix((data, (rows, cols)), shape=(k, r * (m + n)))


def _lifted_operator(U_t, V_t, omega: ObservationSet) -> LinearOperator:
    U_t = as_matrix(U_t, "U_t")
    V_t = as_matrix(V_t, "V_t")
    if U_t.shape[1] != V_t.shape[1]:
        raise ValueError(f"factor ranks differ: {U_t.shape[1]} vs {V_t.shape[1]}")
    if omega.shape != (U_t.shape[0], V_t.shape[0]):
        raise ValueError("factor shapes do not match the observation set")
    L = _lifted_sparse(U_t, V_t, omega)
    LT = sparse.csr_matrix(L.T)
    return LinearOperator(L.shape[1], L.shape[0], lambda x: L @ x, lambda y: LT @ y)


def lifted_operator_r2rils(U_t, V_t, omega: ObservationSet) -> LinearOperator:
    """Map stacked (A, B) to the observed entries of U_t @ B.T + A @ V_t.T.

    A is (m, r) and B is (n, r); the stacked unknown is
    [vec_F(A); vec_F(B)] of length r(m+n).
    """
    return _lifted_operator(U_t, V_t, omega)


def lifted_operator_gnmr(U_t, V_t, omega: ObservationSet) -> LinearOperator:
    """Map stacked (U, V) to the observed entries of U_t @ V.T + U @ V_t.T.

    Same map as the rank-2r lift, with the unknown blocks named for the
    Gauss-Newton step; the caller folds the constant term into the
    right-hand side.
    """
    return _lifted_operator(U_t, V_t, omega)


def split_stacked_factors(z, m: int, n: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Unpack the column-major stacked solution into its (m, r) and (n, r) blocks."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (r * (m + n),):
        raise ValueError(f"stacked vector has length {z.size}, expected {r * (m + n)}")
    first = z[: m * r].reshape((m, r), order="F")
    second = z[m * r :].reshape((n, r), order="F")
    return first, second


@dataclass
class LsqrOutcome:
    solution: np.ndarray
    iterations: int
    relative_residual: float
    stop_reason: str
    residual_norms: np.ndarray = field(repr=False, default=None)


def lsqr_least_norm(
    op: LinearOperator, rhs, max_iter: int = 1000, tol: float = 1e-11
) -> LsqrOutcome:
    """Minimum-norm least-squares solution of op(x) ~= rhs via LSQR.

    Golub-Kahan bidiagonalization started from x = 0, which keeps every
    iterate in the row space of the operator and therefore converges to the
    least-norm solution. Stopping follows the standard two tests with
    atol = btol = tol: the system is consistent within
    tol * (|b| + |A| |x|), or |A' r| <= tol * |A| |r| with |A| accumulated
    from the bidiagonalization. ``residual_norms`` records the estimated
    |b - A x| after each iteration (nonincreasing by construction).
    """
    b = np.asarray(rhs, dtype=np.float64)
    if b.shape != (op.output_dim,):
        raise ValueError(f"rhs length {b.shape} does not match operator output {op.output_dim}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")

    eps = np.finfo(np.float64).eps
    x = np.zeros(op.input_dim)
    u = b.copy()
    beta = float(np.linalg.norm(u))
    bnorm = beta
    rnorms = [beta]
    if beta == 0.0:
        return LsqrOutcome(x, 0, 0.0, STOP_TOLERANCE, np.array(rnorms))
    u /= beta
    v = op.apply_adjoint(u)
    alpha = float(np.linalg.norm(v))
    if alpha == 0.0:
        # A' b = 0, so x = 0 already minimizes |A x - b|.
        return LsqrOutcome(x, 0, 1.0, STOP_TOLERANCE, np.array(rnorms))
    v /= alpha
    w = v.copy()
    phibar = beta
    rhobar = alpha
    anorm2 = alpha * alpha
    itn = 0
    reason = STOP_ITERATION_CAP

    while itn < max_iter:
        itn += 1
        u = op.apply(v) - alpha * u
        beta = float(np.linalg.norm(u))
        if not math.isfinite(beta):
            reason = STOP_BREAKDOWN
            break
        if beta > 0.0:
            u /= beta
        anorm2 += beta * beta
        v = op.apply_adjoint(u) - beta * v
        alpha = float(np.linalg.norm(v))
        if not math.isfinite(alpha):
            reason = STOP_BREAKDOWN
            break
        if alpha > 0.0:
            v /= alpha

        rho = math.hypot(rhobar, beta)
        if rho == 0.0:
            reason = STOP_TOLERANCE
            break
        c = rhobar / rho
        s = beta / rho
        theta = s * alpha
        rhobar = -c * alpha
        phi = c * phibar
        phibar = s * phibar

        x += (phi / rho) * w
        w = v - (theta / rho) * w
        anorm2 += alpha * alpha
        rnorms.append(phibar)
        if not math.isfinite(phibar):
            reason = STOP_BREAKDOWN
            break

        anorm = math.sqrt(anorm2)
        arnorm = alpha * abs(s * phi)
        xnorm = float(np.linalg.norm(x))
        # Consistent-system test: |r| small relative to |b| + |A||x|.
        if phibar <= tol * bnorm + tol * anorm * xnorm:
            reason = STOP_TOLERANCE
            break
        # Least-squares test: |A' r| small relative to |A||r|.
        if arnorm <= tol * anorm * phibar + eps * anorm * anorm * xnorm:
            reason = STOP_TOLERANCE
            break
        if alpha == 0.0:
            # Krylov space exhausted; the current x is exact.
            reason = STOP_TOLERANCE
            break

    residual = float(np.linalg.norm(b - op.apply(x)))
    return LsqrOutcome(x, itn, residual / bnorm, reason, np.array(rnorms))
