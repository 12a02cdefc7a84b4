"""Render benchmark sweep aggregates into per-scheme log-error panels.

Input is the aggregates CSV produced by the mclab sweep runner (header
scheme,solver,m,n,r,trial_count,median_log_nrmse,mean_log_nrmse,success_rate).
Each scheme becomes one panel; panels are grouped two per image, with one
curve per solver, horizontal reference lines at the success threshold
(log10 error = -4) and at machine-precision recovery (-11), and a fixed
alphabetical solver-to-color assignment so curves are comparable across
figures. Rendering is deterministic: repeated runs produce byte-identical
files for identical input.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

SUCCESS_LINE = -4.0
MACHINE_PRECISION_LINE = -11.0

REQUIRED_COLUMNS = (
    "scheme", "solver", "m", "n", "r", "trial_count",
    "median_log_nrmse", "mean_log_nrmse", "success_rate",
)
STAT_COLUMNS = {"median": "median_log_nrmse", "mean": "mean_log_nrmse"}
X_LABELS = {"r": "rank r", "n": "matrix dimension n"}

# deterministic SVG ids across runs
plt.rcParams["svg.hashsalt"] = "figrender"


class SchemaError(ValueError):
    """The CSV does not carry the expected aggregate columns."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    x_axis: str = "r"
    statistic: str = "median"
    out_dir: str = "."
    image_format: str = "svg"

    def __post_init__(self):
        if self.x_axis not in X_LABELS:
            raise ValueError(f"x_axis must be 'r' or 'n', got {self.x_axis!r}")
        if self.statistic not in STAT_COLUMNS:
            raise ValueError(f"statistic must be 'median' or 'mean', got {self.statistic!r}")
        if self.image_format not in ("svg", "png"):
            raise ValueError(f"image_format must be 'svg' or 'png', got {self.image_format!r}")


def load_aggregates(csv_path) -> list[dict]:
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in REQUIRED_COLUMNS if col not in header]
        if missing:
            raise SchemaError(f"{csv_path}: missing column(s) {', '.join(missing)}")
        rows = []
        for raw in reader:
            rows.append({
                "scheme": raw["scheme"],
                "solver": raw["solver"],
                "m": int(raw["m"]),
                "n": int(raw["n"]),
                "r": int(raw["r"]),
                "trial_count": int(raw["trial_count"]),
                "median_log_nrmse": float(raw["median_log_nrmse"]),
                "mean_log_nrmse": float(raw["mean_log_nrmse"]),
                "success_rate": float(raw["success_rate"]),
            })
    if not rows:
        raise SchemaError(f"{csv_path}: no data rows")
    return rows


def _chunk_pairs(items):
    return [items[i:i + 2] for i in range(0, len(items), 2)]


def build_figures(spec: PlotSpec) -> list[tuple[str, plt.Figure]]:
    """One figure per scheme pair; returns (name, figure) tuples unsaved."""
    rows = load_aggregates(spec.csv_path)
    stat_col = STAT_COLUMNS[spec.statistic]
    schemes = sorted({row["scheme"] for row in rows})
    solvers = sorted({row["solver"] for row in rows})
    cycle = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    color_of = {solver: cycle[i % len(cycle)] for i, solver in enumerate(solvers)}

    figures = []
    for pair in _chunk_pairs(schemes):
        fig, axes = plt.subplots(1, len(pair), figsize=(5.0 * len(pair), 3.8),
                                 squeeze=False, sharey=True)
        for ax, scheme in zip(axes[0], pair):
            panel = [row for row in rows if row["scheme"] == scheme]
            for solver in solvers:
                curve = sorted((row for row in panel if row["solver"] == solver),
                               key=lambda row: row[spec.x_axis])
                if not curve:
                    continue
                ax.plot([row[spec.x_axis] for row in curve],
                        [row[stat_col] for row in curve],
                        marker="o", markersize=4, color=color_of[solver], label=solver)
            ax.axhline(SUCCESS_LINE, color="gray", linestyle="--", linewidth=1)
            ax.axhline(MACHINE_PRECISION_LINE, color="gray", linestyle=":", linewidth=1)
            ax.set_title(scheme)
            ax.set_xlabel(X_LABELS[spec.x_axis])
            ax.grid(True, alpha=0.3)
        axes[0][0].set_ylabel(f"log10 NRMSE ({spec.statistic} over trials)")
        axes[0][-1].legend(loc="best", fontsize=8)
        fig.tight_layout()
        figures.append(("_".join(pair).replace(" ", ""), fig))
    return figures


def render(spec: PlotSpec) -> list[Path]:
    """Write one image per scheme pair; returns the written paths."""
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, fig in build_figures(spec):
        path = out_dir / f"lognrmse_vs_{spec.x_axis}_{name}.{spec.image_format}"
        fig.savefig(path, metadata={"Date": None} if spec.image_format == "svg" else None)
        plt.close(fig)
        written.append(path)
    return written
