"""Command line entry point: render sweep aggregates to figure files."""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mclab-render",
        description="Render mclab aggregate CSVs into log-error figures",
    )
    parser.add_argument("--csv", required=True, help="aggregates CSV from an mclab sweep")
    parser.add_argument("--x", choices=("r", "n"), default="r", help="x axis column")
    parser.add_argument("--stat", choices=("median", "mean"), default="median",
                        help="which per-group statistic to plot")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", choices=("svg", "png"), default="svg",
                        help="image format (vector by default)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(csv_path=args.csv, x_axis=args.x, statistic=args.stat,
                    out_dir=args.out, image_format=args.format)
    try:
        paths = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
