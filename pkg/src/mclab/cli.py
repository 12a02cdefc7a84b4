"""Command line interface: sweep, solve, and demo subcommands.

Exit codes: 0 on success, 1 for configuration problems (bad arguments,
unreadable configs, unwritable outputs), 2 for runtime or solver failures.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import runner
from .fileio import ParseError
from .runner import ConfigError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # Argument mistakes are configuration errors (exit 1, not argparse's 2).
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mclab", description="Matrix completion laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a configured experiment sweep")
    sweep.add_argument("--config", required=True, help="JSON experiment config")
    sweep.add_argument("--out", required=True, help="output directory for CSV files")
    sweep.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    sweep.add_argument("--quiet", action="store_true", help="suppress per-cell progress")

    solve = sub.add_parser("solve", help="complete a single matrix from files")
    solve.add_argument("--matrix", required=True, help="reference matrix file ('m n' header)")
    solve.add_argument("--mask", required=True, help="observed entries file ('i j value' lines)")
    solve.add_argument("--solver", required=True, choices=runner.solvers.SOLVERS)
    solve.add_argument("--rank", type=int, required=True, help="target rank")
    solve.add_argument("--out", required=True, help="output file for the completed matrix")

    demo = sub.add_parser("demo", help="run a bundled sweep approximating one benchmark figure")
    demo.add_argument("--figure", type=int, required=True, choices=(1, 2, 3, 4))
    demo.add_argument("--axis", choices=(runner.RANK_AXIS, runner.DIMENSION_AXIS),
                      default=runner.RANK_AXIS)
    demo.add_argument("--out", default=None, help="output directory (default demo_fig<N>)")
    demo.add_argument("--trials", type=int, default=None,
                      help="override the per-scheme trial counts (useful for a quick look)")
    demo.add_argument("--workers", type=int, default=1)
    demo.add_argument("--quiet", action="store_true")

    return parser


def _cmd_sweep(args) -> int:
    cfg = runner.ExperimentConfig.from_json(args.config)
    records, aggregates = runner.run_sweep(
        cfg, out_dir=args.out, workers=args.workers, progress=not args.quiet
    )
    print(f"wrote {len(records)} trials and {len(aggregates)} aggregate rows to {args.out}")
    return 0


def _cmd_solve(args) -> int:
    summary = runner.solve_file(args.matrix, args.mask, args.solver, args.rank, args.out)
    for line in summary.lines():
        print(line)
    print(f"wrote estimate to {args.out}")
    return 0


def _cmd_demo(args) -> int:
    cfg = runner.demo_config(args.figure, axis=args.axis, trials=args.trials)
    out = args.out if args.out is not None else f"demo_fig{args.figure}"
    print(f"figure {args.figure} ({args.axis} sweep): {runner.demo_note(args.figure)}")
    print(f"schemes={list(cfg.schemes)} solvers={list(cfg.solvers)} "
          f"axis_values={list(cfg.axis_values)}")
    records, aggregates = runner.run_sweep(
        cfg, out_dir=out, workers=args.workers, progress=not args.quiet
    )
    print(f"wrote {len(records)} trials and {len(aggregates)} aggregate rows to {out}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_demo(args)
    except (ConfigError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - surface solver/runtime failures as exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
