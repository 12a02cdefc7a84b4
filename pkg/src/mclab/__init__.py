"""Matrix completion laboratory.

A small library and CLI for studying low-rank matrix completion under
observation masks that depend on the matrix values, with seeded synthetic
data, four completion solvers, and a reproducible sweep runner.
"""

from .core import (
    FactorPair,
    ObservationSet,
    SolverReport,
    frobenius_norm,
    masked_frobenius_norm,
    truncated_svd,
)
from .datagen import DataGenSpec, generate, generate_gaussian_lowrank, generate_ratings_matrix
from .evaluation import AggregateRecord, TrialRecord, aggregate, classify, log_nrmse, nrmse
from .linops import (
    LinearOperator,
    LsqrOutcome,
    lifted_operator_gnmr,
    lifted_operator_r2rils,
    lsqr_least_norm,
    project_omega,
    scatter_omega,
)
from .runner import ExperimentConfig, derive_trial_seed, run_sweep, run_trial, solve_file
from .sampling import (
    SamplingSpec,
    calibrate_alpha,
    mask_group_specific,
    mask_mean_centric,
    mask_relu,
    mask_uniform,
    observe,
    sample_observations,
)
from .solvers import (
    GNMR_CONFIG,
    FPCA_CONFIG,
    NNLS_CONFIG,
    R2RILS_CONFIG,
    GnmrConfig,
    R2rilsConfig,
    ShrinkageConfig,
    fpca_solve,
    gnmr_solve,
    nnls_solve,
    r2rils_solve,
    svt,
)

__version__ = "0.1.0"
