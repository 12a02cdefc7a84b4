"""Configuration-driven experiment sweeps with seeded, reproducible trials.

A sweep is the Cartesian product of one axis (rank or dimension), the
requested schemes, solvers, and trial indices. All solvers within one
(scheme, axis value, trial) cell share the same ground truth and mask so
solver comparisons are paired; the per-cell seed is a hash of the base seed
and the cell coordinates, never of the solver. Results land in two CSV
files with fixed schemas (one row per trial, one row per aggregate group).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import datagen, sampling, solvers
from .core import ObservationSet
from .evaluation import AggregateRecord, TrialRecord, aggregate, nrmse
from .sampling import SamplingSpec

log = logging.getLogger(__name__)

RANK_AXIS = "rank"
DIMENSION_AXIS = "dimension"

TRIAL_COLUMNS = [
    "scheme", "solver", "m", "n", "r", "trial", "seed", "observed_fraction",
    "nrmse", "log_nrmse", "success", "outer_iterations", "runtime_ms",
]
AGGREGATE_COLUMNS = [
    "scheme", "solver", "m", "n", "r", "trial_count",
    "median_log_nrmse", "mean_log_nrmse", "success_rate",
]

DEFAULT_TRIALS = {
    sampling.RELU: 50,
    sampling.MEAN_CENTRIC: 50,
    sampling.UNIFORM: 50,
    sampling.GROUP_SPECIFIC: 20,
}

_SOLVER_CONFIG_TYPES = {
    solvers.FPCA: solvers.ShrinkageConfig,
    solvers.NNLS: solvers.ShrinkageConfig,
    solvers.R2RILS: solvers.R2rilsConfig,
    solvers.GNMR: solvers.GnmrConfig,
}
_SOLVER_DEFAULTS = {
    solvers.FPCA: solvers.FPCA_CONFIG,
    solvers.NNLS: solvers.NNLS_CONFIG,
    solvers.R2RILS: solvers.R2RILS_CONFIG,
    solvers.GNMR: solvers.GNMR_CONFIG,
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    sweep: str
    axis_values: tuple[int, ...]
    schemes: tuple[str, ...]
    solvers: tuple[str, ...]
    m: int | None = None
    n: int | None = None
    r: int | None = None
    trials: int | None = None
    base_seed: int = 0
    target_fraction: float = 0.5
    family: str | None = None
    ratings_rank_bump: bool = True
    center_on_mean: bool = False
    uniform_bernoulli: bool = False
    solver_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sweep not in (RANK_AXIS, DIMENSION_AXIS):
            raise ConfigError(f"sweep must be 'rank' or 'dimension', got {self.sweep!r}")
        values = tuple(int(v) for v in self.axis_values)
        if not values or any(v < 1 for v in values):
            raise ConfigError("axis_values must be a nonempty list of positive integers")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError("axis_values must be strictly increasing")
        object.__setattr__(self, "axis_values", values)
        if self.sweep == RANK_AXIS:
            if self.m is None or self.n is None:
                raise ConfigError("rank sweep requires fixed m and n")
        else:
            if self.r is None:
                raise ConfigError("dimension sweep requires a fixed rank r")
        schemes = tuple(self.schemes)
        if not schemes:
            raise ConfigError("schemes list is empty")
        for s in schemes:
            if s not in sampling.SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}")
        object.__setattr__(self, "schemes", schemes)
        solver_names = tuple(self.solvers)
        if not solver_names:
            raise ConfigError("solvers list is empty")
        for s in solver_names:
            if s not in solvers.SOLVERS:
                raise ConfigError(f"unknown solver {s!r}")
        object.__setattr__(self, "solvers", solver_names)
        if self.trials is not None and self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0.0 < self.target_fraction <= 1.0:
            raise ConfigError("target_fraction must lie in (0, 1]")
        if self.family is not None and self.family not in datagen.FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        for name, override in self.solver_overrides.items():
            if name not in solvers.SOLVERS:
                raise ConfigError(f"solver override for unknown solver {name!r}")
            allowed = {f.name for f in fields(_SOLVER_CONFIG_TYPES[name])}
            unknown = set(override) - allowed
            if unknown:
                raise ConfigError(f"unknown {name} config keys: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top-level JSON value must be an object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "sweep": self.sweep,
            "axis_values": list(self.axis_values),
            "schemes": list(self.schemes),
            "solvers": list(self.solvers),
            "m": self.m,
            "n": self.n,
            "r": self.r,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "target_fraction": self.target_fraction,
            "family": self.family,
            "ratings_rank_bump": self.ratings_rank_bump,
            "center_on_mean": self.center_on_mean,
            "uniform_bernoulli": self.uniform_bernoulli,
            "solver_overrides": self.solver_overrides,
        }

    def cell_size(self, axis_value: int) -> tuple[int, int, int]:
        if self.sweep == RANK_AXIS:
            return self.m, self.n, axis_value
        return axis_value, axis_value, self.r

    def trials_for(self, scheme: str) -> int:
        return self.trials if self.trials is not None else DEFAULT_TRIALS[scheme]


def derive_trial_seed(base_seed: int, scheme: str, m: int, n: int, r: int, trial: int) -> int:
    """Stable 64-bit seed for one experiment cell.

    The solver is deliberately absent so every solver sees the same instance
    within a cell (paired comparisons).
    """
    key = f"{base_seed}|{scheme}|{m}|{n}|{r}|{trial}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def _child_seed(seed: int, label: str) -> int:
    return int.from_bytes(hashlib.sha256(f"{seed}|{label}".encode()).digest()[:8], "big")


def _family_for(scheme: str, family: str | None) -> str:
    if family is not None:
        return family
    if scheme == sampling.GROUP_SPECIFIC:
        return datagen.UNIFORM_RESCALED
    return datagen.GAUSSIAN_FACTORS


def build_instance(
    scheme: str,
    m: int,
    n: int,
    r: int,
    seed: int,
    *,
    target_fraction: float = 0.5,
    family: str | None = None,
    ratings_rank_bump: bool = True,
    center_on_mean: bool = False,
    uniform_bernoulli: bool = False,
) -> tuple[np.ndarray, ObservationSet, int]:
    """Generate the ground truth and mask for one cell.

    Returns (X_star, omega, solver_rank). The solver rank is r + 1 for the
    rescaled-ratings family (the affine shift adds one rank) unless
    ``ratings_rank_bump`` is off.
    """
    fam = _family_for(scheme, family)
    spec = datagen.DataGenSpec(m, n, r, fam, _child_seed(seed, "data"))
    X, _ = datagen.generate(spec)
    mask_spec = SamplingSpec(
        scheme=scheme,
        seed=_child_seed(seed, "mask"),
        target_fraction=target_fraction,
        center_on_mean=center_on_mean,
        bernoulli=uniform_bernoulli,
    )
    omega = sampling.sample_observations(X, mask_spec)
    solver_rank = r + 1 if (fam == datagen.UNIFORM_RESCALED and ratings_rank_bump) else r
    return X, omega, solver_rank


def solver_config(solver: str, override: dict | None = None):
    """Default config for a solver, with optional field overrides."""
    cfg = _SOLVER_DEFAULTS[solver]
    if override:
        cfg = replace(cfg, **override)
    return cfg


def run_solver(solver: str, omega: ObservationSet, rank: int, override: dict | None = None):
    cfg = solver_config(solver, override)
    if solver == solvers.FPCA:
        return solvers.fpca_solve(omega, cfg)
    if solver == solvers.NNLS:
        return solvers.nnls_solve(omega, cfg)
    if solver == solvers.R2RILS:
        return solvers.r2rils_solve(omega, rank, cfg)
    return solvers.gnmr_solve(omega, rank, cfg)


def _record_for(scheme, solver, m, n, r, trial, seed, X, omega, solver_rank, override):
    start = time.perf_counter()
    try:
        report = run_solver(solver, omega, solver_rank, override)
        error = nrmse(report.estimate, X)
        iterations = report.outer_iterations
        runtime_ms = report.runtime_ms
    except Exception as exc:  # noqa: BLE001 - a failed trial must not kill the sweep
        log.warning("solver %s failed on %s m=%d n=%d r=%d seed=%d: %s",
                    solver, scheme, m, n, r, seed, exc)
        error = math.inf
        iterations = 0
        runtime_ms = (time.perf_counter() - start) * 1e3
    return TrialRecord.from_error(
        scheme, solver, m, n, r, trial, seed, omega.fraction, error, iterations, runtime_ms,
    )


def run_trial(
    scheme: str,
    solver: str,
    m: int,
    n: int,
    r: int,
    seed: int,
    *,
    trial: int = 0,
    target_fraction: float = 0.5,
    family: str | None = None,
    ratings_rank_bump: bool = True,
    center_on_mean: bool = False,
    uniform_bernoulli: bool = False,
    override: dict | None = None,
) -> TrialRecord:
    """Run one (scheme, solver) trial end to end; fully determined by the seed."""
    X, omega, solver_rank = build_instance(
        scheme, m, n, r, seed,
        target_fraction=target_fraction,
        family=family,
        ratings_rank_bump=ratings_rank_bump,
        center_on_mean=center_on_mean,
        uniform_bernoulli=uniform_bernoulli,
    )
    return _record_for(scheme, solver, m, n, r, trial, seed, X, omega, solver_rank, override)


def _run_cell(cfg: ExperimentConfig, scheme: str, axis_value: int, trial: int) -> list[TrialRecord]:
    m, n, r = cfg.cell_size(axis_value)
    seed = derive_trial_seed(cfg.base_seed, scheme, m, n, r, trial)
    X, omega, solver_rank = build_instance(
        scheme, m, n, r, seed,
        target_fraction=cfg.target_fraction,
        family=cfg.family,
        ratings_rank_bump=cfg.ratings_rank_bump,
        center_on_mean=cfg.center_on_mean,
        uniform_bernoulli=cfg.uniform_bernoulli,
    )
    return [
        _record_for(scheme, solver, m, n, r, trial, seed, X, omega, solver_rank,
                    cfg.solver_overrides.get(solver))
        for solver in cfg.solvers
    ]


def _cell_task(args) -> list[TrialRecord]:
    cfg_dict, scheme, axis_value, trial = args
    return _run_cell(ExperimentConfig.from_dict(cfg_dict), scheme, axis_value, trial)


def run_sweep(
    cfg: ExperimentConfig,
    out_dir=None,
    workers: int = 1,
    progress: bool = False,
) -> tuple[list[TrialRecord], list[AggregateRecord]]:
    """Execute the full sweep; optionally write trials.csv and aggregates.csv.

    The output is sorted by (scheme, solver, m, n, r, trial), so the CSV
    content is independent of execution order and worker count (runtimes
    aside).
    """
    out_path = None
    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        probe = out_path / ".write-probe"
        try:
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise ConfigError(f"output directory {out_path} is not writable: {exc}") from None

    cells = [
        (scheme, axis_value, trial)
        for scheme in cfg.schemes
        for axis_value in cfg.axis_values
        for trial in range(cfg.trials_for(scheme))
    ]
    records: list[TrialRecord] = []
    if workers <= 1:
        for idx, (scheme, axis_value, trial) in enumerate(cells):
            records.extend(_run_cell(cfg, scheme, axis_value, trial))
            if progress:
                print(f"  cell {idx + 1}/{len(cells)}: {scheme} axis={axis_value} "
                      f"trial={trial}", flush=True)
    else:
        tasks = [(cfg.to_dict(), scheme, axis_value, trial) for scheme, axis_value, trial in cells]
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn")) as pool:
            for idx, cell_records in enumerate(pool.map(_cell_task, tasks, chunksize=1)):
                records.extend(cell_records)
                if progress:
                    print(f"  cell {idx + 1}/{len(cells)} done", flush=True)

    records.sort(key=lambda rec: (rec.scheme, rec.solver, rec.m, rec.n, rec.r, rec.trial))
    aggregates = aggregate(records)
    if out_path is not None:
        write_trials_csv(out_path / "trials.csv", records)
        write_aggregates_csv(out_path / "aggregates.csv", aggregates)
        (out_path / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    return records, aggregates


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trials_csv(path, records: list[TrialRecord]):
    lines = [",".join(TRIAL_COLUMNS)]
    for rec in records:
        lines.append(",".join(_format(getattr(rec, col)) for col in TRIAL_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def write_aggregates_csv(path, aggregates: list[AggregateRecord]):
    lines = [",".join(AGGREGATE_COLUMNS)]
    for rec in aggregates:
        lines.append(",".join(_format(getattr(rec, col)) for col in AGGREGATE_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


# Desk-scale stand-ins for the benchmark figures. The exact sizes behind the
# published curves are not recorded anywhere, so these sweeps use square
# matrices at sizes where half observation comfortably oversamples the rank.
_DEMO_NOTES = {
    1: "Convex-solver comparison under relu vs uniform masks; the interior-point "
       "solver is out of scope, so only nnls is run.",
    2: "fpca / r2rils / gnmr under relu vs uniform masks.",
    3: "fpca / r2rils / gnmr under mean-centric vs uniform masks.",
    4: "fpca / r2rils / gnmr on ratings matrices under group-specific vs uniform "
       "masks; both schemes draw from the rescaled-ratings family and solvers "
       "receive rank r + 1.",
}


def demo_config(figure: int, axis: str = RANK_AXIS, trials: int | None = None) -> ExperimentConfig:
    """Bundled sweep approximating one of the four benchmark figures."""
    if figure not in (1, 2, 3, 4):
        raise ConfigError(f"figure must be 1, 2, 3, or 4, got {figure}")
    if axis == RANK_AXIS:
        geometry = {"m": 100, "n": 100, "axis_values": tuple(range(1, 13))}
        if figure == 4:
            geometry["axis_values"] = tuple(range(1, 9))
    elif axis == DIMENSION_AXIS:
        geometry = {"r": 4, "axis_values": (60, 100, 140, 200)}
    else:
        raise ConfigError(f"axis must be 'rank' or 'dimension', got {axis!r}")

    scheme_by_figure = {
        1: (sampling.RELU, sampling.UNIFORM),
        2: (sampling.RELU, sampling.UNIFORM),
        3: (sampling.MEAN_CENTRIC, sampling.UNIFORM),
        4: (sampling.GROUP_SPECIFIC, sampling.UNIFORM),
    }
    solver_list = (solvers.NNLS,) if figure == 1 else (solvers.FPCA, solvers.R2RILS, solvers.GNMR)
    family = datagen.UNIFORM_RESCALED if figure == 4 else None
    if trials is None and figure == 4:
        trials = 20
    return ExperimentConfig(
        sweep=axis,
        schemes=scheme_by_figure[figure],
        solvers=solver_list,
        trials=trials,
        family=family,
        base_seed=20240 + figure,
        **geometry,
    )


def demo_note(figure: int) -> str:
    return _DEMO_NOTES[figure]


def solve_file(
    matrix_path,
    mask_path,
    solver: str,
    rank: int,
    out_path,
    override: dict | None = None,
) -> SolverReportSummary:
    """Complete a matrix given on disk and write the estimate back to disk.

    The matrix file provides the reference matrix (used for the error
    report); the mask file provides the observed entries the solver sees.
    """
    from .fileio import read_mask, read_matrix, write_matrix

    if solver not in solvers.SOLVERS:
        raise ConfigError(f"unknown solver {solver!r}")
    reference = read_matrix(matrix_path)
    omega = read_mask(mask_path, reference.shape)
    report = run_solver(solver, omega, rank, override)
    write_matrix(out_path, report.estimate)
    error = nrmse(report.estimate, reference)
    return SolverReportSummary(
        solver=solver,
        shape=reference.shape,
        observed_fraction=omega.fraction,
        outer_iterations=report.outer_iterations,
        final_relative_residual=report.final_relative_residual,
        converged=report.converged,
        runtime_ms=report.runtime_ms,
        nrmse_vs_reference=error,
    )


@dataclass(frozen=True)
class SolverReportSummary:
    solver: str
    shape: tuple[int, int]
    observed_fraction: float
    outer_iterations: int
    final_relative_residual: float
    converged: bool
    runtime_ms: float
    nrmse_vs_reference: float

    def lines(self) -> list[str]:
        m, n = self.shape
        return [
            f"solver: {self.solver}",
            f"shape: {m} x {n}",
            f"observed_fraction: {self.observed_fraction:.6f}",
            f"outer_iterations: {self.outer_iterations}",
            f"final_relative_residual: {self.final_relative_residual:.3e}",
            f"converged: {str(self.converged).lower()}",
            f"runtime_ms: {self.runtime_ms:.1f}",
            f"nrmse_vs_reference: {self.nrmse_vs_reference:.3e}",
        ]
