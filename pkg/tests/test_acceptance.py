"""Acceptance suite: one test per acceptance criterion.

Each test prints one `[ACCEPTANCE] <criterion>: PASS/FAIL` line (run pytest
with -s to see them live). The full suite executes real benchmark sweeps
and takes roughly 20-30 minutes on one core.

Note on test_criterion_fig2_relu_trend: that test keeps its stated
thresholds although they are mathematically unattainable, so it fails by
design rather than being weakened. Under the nonnegative-entry mask a
rank-1 ground truth is unidentifiable: the observed positions split into
two disconnected sign blocks, leaving one free relative scale between the
blocks, so no method can recover it. Exact nuclear-norm minimization also
provably prefers the zero-filled completion at rank 1 (its nuclear norm is
never larger than the truth's, by Cauchy-Schwarz on the sign-block
decomposition). The reproducible form of the same finding is asserted in
test_fig2_relu_reproducible_trend and passes.
"""

import math

import numpy as np
import pytest

from mclab.core import ObservationSet
from mclab.datagen import DataGenSpec, generate_gaussian_lowrank
from mclab.linops import (
    LinearOperator,
    lifted_operator_gnmr,
    lifted_operator_r2rils,
    lsqr_least_norm,
    materialize,
    project_omega,
    scatter_omega,
)
from mclab.runner import ExperimentConfig, build_instance, run_sweep, run_trial
from mclab.sampling import SamplingSpec, calibrate_alpha, mask_group_specific, mask_mean_centric, mask_relu, mask_uniform, sample_observations
from mclab.solvers import gnmr_solve, svt


def report(criterion: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[ACCEPTANCE] {criterion}: {status} {detail}".rstrip())
    return ok


def rates_by(aggregates):
    return {(a.scheme, a.solver, a.r): a.success_rate for a in aggregates}


def medians_by(aggregates):
    return {(a.scheme, a.solver, a.r): a.median_log_nrmse for a in aggregates}


def sweep(schemes, solvers, ranks, trials, base_seed, family=None, m=100, n=100):
    cfg = ExperimentConfig(
        sweep="rank", axis_values=tuple(ranks), m=m, n=n,
        schemes=tuple(schemes), solvers=tuple(solvers),
        trials=trials, base_seed=base_seed, family=family,
    )
    return run_sweep(cfg)


# --- criterion 1: LSQR vs dense pseudo-inverse -------------------------------

def test_criterion_lsqr_oracle_equivalence():
    rng = np.random.default_rng(20260801)
    shapes = [(6, 5, 2), (8, 7, 2), (7, 6, 2), (10, 9, 3), (9, 6, 2), (12, 8, 3)]
    checked = 0
    worst = 0.0
    while checked < 20:
        m, n, r = shapes[checked % len(shapes)]
        if r * (m + n) > 60:
            raise AssertionError("test geometry exceeds the stated size bound")
        U = rng.standard_normal((m, r))
        V = rng.standard_normal((n, r))
        mask = rng.random((m, n)) < 0.7
        mask[rng.integers(m), rng.integers(n)] = True
        X = rng.standard_normal((m, n))
        omega = ObservationSet.from_mask(X, mask)
        builder = lifted_operator_r2rils if checked % 2 == 0 else lifted_operator_gnmr
        op = builder(U, V, omega)
        rhs = rng.standard_normal(op.output_dim)
        out = lsqr_least_norm(op, rhs, max_iter=5000, tol=1e-14)
        expected = np.linalg.pinv(materialize(op)) @ rhs
        gap = np.linalg.norm(out.solution - expected) / max(np.linalg.norm(expected), 1.0)
        worst = max(worst, gap)
        checked += 1
    ok = worst <= 1e-7
    assert report("lsqr-oracle-equivalence", ok, f"(20 systems, worst gap {worst:.2e})")


# --- criterion 2: adjoint and prox invariant suites --------------------------

def test_criterion_adjoint_and_prox_invariants():
    rng = np.random.default_rng(20260802)
    worst_adjoint = 0.0

    def check_adjoint(op):
        nonlocal worst_adjoint
        for _ in range(20):
            x = rng.standard_normal(op.input_dim)
            y = rng.standard_normal(op.output_dim)
            ax = op.apply(x)
            gap = abs(ax @ y - x @ op.apply_adjoint(y))
            worst_adjoint = max(worst_adjoint, gap / (np.linalg.norm(ax) * np.linalg.norm(y) + 1.0))

    for m, n, r in ((9, 7, 2), (12, 10, 3), (6, 14, 2)):
        mask = rng.random((m, n)) < 0.5
        mask[0, 0] = True
        X = rng.standard_normal((m, n))
        omega = ObservationSet.from_mask(X, mask)
        check_adjoint(LinearOperator(
            m * n, omega.size,
            lambda v, o=omega, mm=m, nn=n: project_omega(v.reshape(mm, nn), o),
            lambda w, o=omega: scatter_omega(w, o).ravel(),
        ))
        U = rng.standard_normal((m, r))
        V = rng.standard_normal((n, r))
        check_adjoint(lifted_operator_r2rils(U, V, omega))
        check_adjoint(lifted_operator_gnmr(U, V, omega))
    adjoint_ok = worst_adjoint <= 1e-10

    # svt prox invariants
    X = rng.standard_normal((8, 6))
    theta = 0.8
    P = svt(X, theta)
    s_in = np.linalg.svd(X, compute_uv=False)
    s_out = np.linalg.svd(P, compute_uv=False)
    shrink_ok = np.abs(s_out - np.maximum(s_in - theta, 0.0)).max() <= 1e-10
    nuc = lambda M: np.linalg.svd(M, compute_uv=False).sum()
    base = theta * nuc(P) + 0.5 * np.linalg.norm(X - P) ** 2
    prox_ok = all(
        base <= theta * nuc(Z) + 0.5 * np.linalg.norm(X - Z) ** 2 + 1e-10
        for Z in (P + rng.standard_normal((8, 6)) * rng.choice([0.01, 0.1, 1.0]) for _ in range(50))
    )
    ok = adjoint_ok and shrink_ok and prox_ok
    assert report("adjoint-and-prox-invariants", ok,
                  f"(worst adjoint gap {worst_adjoint:.2e})")


# --- criterion 3: mask invariants --------------------------------------------

def test_criterion_mask_invariants():
    rng = np.random.default_rng(20260803)
    # relu: exact sign partition
    X, _ = generate_gaussian_lowrank(DataGenSpec(80, 80, 4, "gaussian-factors", 5))
    omega = mask_relu(X)
    relu_ok = omega.values.min() >= 0.0 and np.all(X[~omega.mask_matrix()] < 0.0)

    # mean-centric: exact half count and magnitude partition
    mct_ok = True
    for seed in range(5):
        Xi, _ = generate_gaussian_lowrank(DataGenSpec(101, 83, 3, "gaussian-factors", seed))
        om = mask_mean_centric(Xi, SamplingSpec("mean-centric"))
        mct_ok &= om.size == math.ceil(0.5 * 101 * 83)
        mct_ok &= np.abs(om.values).max() <= np.abs(Xi[~om.mask_matrix()]).min()

    # group-specific: empirical branch rates on constant matrices
    X_ext = np.full((100, 100), 1.5)
    X_mod = np.full((100, 100), 3.0)
    ext_rate = np.mean([mask_group_specific(X_ext, SamplingSpec("group-specific", seed=s)).fraction
                        for s in range(100)])
    mod_rate = np.mean([mask_group_specific(X_mod, SamplingSpec("group-specific", seed=s)).fraction
                        for s in range(100)])
    gs_ok = abs(ext_rate - 0.8) <= 0.02 and abs(mod_rate - 0.2) <= 0.02

    # uniform: index set independent of the matrix values
    spec = SamplingSpec("uniform", seed=17)
    A = rng.standard_normal((40, 30))
    B = rng.standard_normal((40, 30))
    oa = sample_observations(A, spec)
    ob = sample_observations(B, spec)
    uar_ok = np.array_equal(oa.rows, ob.rows) and np.array_equal(oa.cols, ob.cols)

    ok = relu_ok and mct_ok and gs_ok and uar_ok
    assert report("mask-invariants", ok,
                  f"(gs rates {ext_rate:.3f}/{mod_rate:.3f})")


# --- criteria 4 and 4-supplementary: relu trend ------------------------------

@pytest.fixture(scope="module")
def fig2_sweep():
    _, aggregates = sweep(["relu"], ["fpca", "r2rils", "gnmr"], range(1, 7),
                          trials=20, base_seed=402)
    return aggregates


def test_criterion_fig2_relu_trend(fig2_sweep):
    """Faithful transcription of the stated criterion; expected to fail.

    Rank-1 problems under the nonnegative mask are unidentifiable (the
    observation graph splits into two sign components, leaving a free
    relative scale), so neither factorization solver can reach a 0.9
    success rate at r = 1, and the convex relaxation provably prefers the
    zero-filled completion there. The module docstring carries the full
    analysis; the reproducible form of this trend is asserted below.
    """
    rates = rates_by(fig2_sweep)
    nc_ok = all(rates[("relu", s, r)] >= 0.9 for s in ("r2rils", "gnmr") for r in range(1, 6))
    fpca_low_ok = all(rates[("relu", "fpca", r)] >= 0.9 for r in (1, 2))
    nc_first_fail = min(
        (r for r in range(1, 7)
         if min(rates[("relu", "r2rils", r)], rates[("relu", "gnmr", r)]) < 0.9),
        default=7,
    )
    fpca_fails_below = any(rates[("relu", "fpca", r)] <= 0.1 for r in range(1, nc_first_fail))
    ok = nc_ok and fpca_low_ok and fpca_fails_below
    table = {k: round(v, 2) for k, v in sorted(rates.items())}
    assert report("fig2-relu-trend (as stated)", ok, f"rates={table}")


def test_fig2_relu_reproducible_trend(fig2_sweep):
    """The attainable form of the relu finding, on identifiable ranks.

    The factorization solvers keep median log-NRMSE at recovery level for
    2 <= r <= 5 while the convex-relaxation solver fails at every rank,
    i.e. it begins to fail under the nonnegative mask at far smaller rank
    than the factorization methods.
    """
    rates = rates_by(fig2_sweep)
    medians = medians_by(fig2_sweep)
    nc_ok = all(medians[("relu", s, r)] <= -4.0 for s in ("r2rils", "gnmr") for r in range(2, 6))
    nc_solid = all(rates[("relu", s, r)] >= 0.9 for s in ("r2rils", "gnmr") for r in (4, 5))
    fpca_ok = all(rates[("relu", "fpca", r)] <= 0.1 for r in range(1, 7))
    ok = nc_ok and nc_solid and fpca_ok
    detail = {f"{s}@r{r}": round(medians[('relu', s, r)], 1)
              for s in ("r2rils", "gnmr") for r in (2, 5)}
    assert report("fig2-relu-trend (reproducible form)", ok, f"medians={detail}")


# --- criterion 5: nnls claims -------------------------------------------------

def test_criterion_fig1_nnls():
    _, relu_aggs = sweep(["relu"], ["nnls"], range(1, 7), trials=20, base_seed=401)
    _, uar_aggs = sweep(["uniform"], ["nnls"], [3], trials=20, base_seed=4011)
    relu_rates = rates_by(relu_aggs)
    uar_rates = rates_by(uar_aggs)
    relu_ok = all(relu_rates[("relu", "nnls", r)] <= 0.1 for r in range(1, 7))
    uar_ok = uar_rates[("uniform", "nnls", 3)] >= 0.9
    ok = relu_ok and uar_ok
    assert report("fig1-nnls", ok,
                  f"(relu max rate {max(relu_rates.values()):.2f}, "
                  f"uniform r=3 rate {uar_rates[('uniform', 'nnls', 3)]:.2f})")


# --- criterion 6: mean-centric trend -----------------------------------------

def test_criterion_fig3_mct_trend():
    _, low_aggs = sweep(["mean-centric"], ["fpca", "r2rils", "gnmr"], [2],
                        trials=20, base_seed=403)
    _, mct_hi_aggs = sweep(["mean-centric"], ["r2rils", "gnmr"], [16],
                           trials=12, base_seed=4031)
    _, uar_hi_aggs = sweep(["uniform"], ["r2rils", "gnmr"], [16],
                           trials=12, base_seed=4032)
    low = rates_by(low_aggs)
    hi_mct = rates_by(mct_hi_aggs)
    hi_uar = rates_by(uar_hi_aggs)

    fpca_ok = low[("mean-centric", "fpca", 2)] <= 0.1
    nc_ok = all(low[("mean-centric", s, 2)] >= 0.9 for s in ("r2rils", "gnmr"))
    # max succeeding rank over the tested grid {2, 16} per scheme
    strict_ok = True
    for s in ("r2rils", "gnmr"):
        mct_max = 16 if hi_mct[("mean-centric", s, 16)] >= 0.9 else 2
        uar_max = 16 if hi_uar[("uniform", s, 16)] >= 0.9 else 0
        strict_ok &= mct_max < uar_max
    ok = fpca_ok and nc_ok and strict_ok
    assert report("fig3-mct-trend", ok,
                  f"(fpca@2 {low[('mean-centric', 'fpca', 2)]:.2f}, "
                  f"mct@16 {hi_mct[('mean-centric', 'gnmr', 16)]:.2f}, "
                  f"uar@16 {hi_uar[('uniform', 'gnmr', 16)]:.2f})")


# --- criterion 7: group-specific trend ---------------------------------------

def test_criterion_fig4_gs_trend():
    _, gs_aggs = sweep(["group-specific"], ["fpca", "r2rils", "gnmr"], range(1, 6),
                       trials=20, base_seed=404)
    _, uar_aggs = sweep(["uniform"], ["fpca"], range(1, 6), trials=20,
                        base_seed=4041, family="uniform-rescaled")
    gs = rates_by(gs_aggs)
    uar = rates_by(uar_aggs)

    # generation rank r maps to effective (solver) rank r + 1; r <= 5 covers
    # effective ranks up to 6
    gnmr_ok = all(gs[("group-specific", "gnmr", r)] >= 0.9 for r in range(1, 6))
    fpca_gs_ok = all(gs[("group-specific", "fpca", r)] <= 0.1 for r in range(1, 6))
    fpca_uar_ok = all(uar[("uniform", "fpca", r)] <= 0.1 for r in range(1, 6))
    r2rils_region = {r for r in range(1, 6) if gs[("group-specific", "r2rils", r)] >= 0.9}
    gnmr_region = {r for r in range(1, 6) if gs[("group-specific", "gnmr", r)] >= 0.9}
    region_ok = r2rils_region <= gnmr_region
    ok = gnmr_ok and fpca_gs_ok and fpca_uar_ok and region_ok
    assert report("fig4-gs-trend", ok,
                  f"(gnmr min rate {min(gs[('group-specific', 'gnmr', r)] for r in range(1, 6)):.2f}, "
                  f"fpca max rate {max(gs[('group-specific', 'fpca', r)] for r in range(1, 6)):.2f})")


# --- criterion 8: noiseless deep recovery ------------------------------------

def test_criterion_deep_recovery():
    X, omega, srank = build_instance("uniform", 100, 100, 3, 42)
    rep = gnmr_solve(omega, srank)
    from mclab.evaluation import nrmse
    err = nrmse(rep.estimate, X)
    ok = err <= 1e-11
    assert report("noiseless-deep-recovery", ok, f"(nrmse {err:.2e})")


# --- criterion 9: sweep determinism -------------------------------------------

def test_criterion_sweep_determinism(tmp_path):
    cfg = ExperimentConfig(
        sweep="rank", axis_values=(2, 3), m=40, n=40,
        schemes=("uniform", "relu"), solvers=("nnls", "gnmr"),
        trials=2, base_seed=11,
    )
    run_sweep(cfg, out_dir=tmp_path / "a")
    run_sweep(cfg, out_dir=tmp_path / "b")

    def strip_runtime(path):
        lines = path.read_text().splitlines()
        return [",".join(line.split(",")[:-1]) for line in lines]

    trials_ok = strip_runtime(tmp_path / "a" / "trials.csv") == strip_runtime(
        tmp_path / "b" / "trials.csv")
    aggs_ok = (tmp_path / "a" / "aggregates.csv").read_text() == (
        tmp_path / "b" / "aggregates.csv").read_text()
    ok = trials_ok and aggs_ok
    assert report("sweep-determinism", ok)


# --- supplementary: dimension-sweep example ----------------------------------

def test_dimension_sweep_mct_gnmr():
    cfg = ExperimentConfig(
        sweep="dimension", axis_values=(60, 100, 140), r=4,
        schemes=("mean-centric",), solvers=("gnmr",), trials=10, base_seed=405,
    )
    _, aggregates = run_sweep(cfg)
    rates = {a.n: a.success_rate for a in aggregates}
    ok = all(rates[n] >= 0.9 for n in (60, 100, 140))
    assert report("dimension-sweep-mct-gnmr", ok, f"rates={rates}")
