"""Standalone plotting scripts: CSV paths in, image files out."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .csvio import HeaderMismatchError
from .plots import PlotSpec, plot_norm_curves, plot_probability_maps


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("csvs", nargs="+", type=Path, help="solver CSV file(s)")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--lin-x", action="store_true", help="linear instead of log x axis")
    parser.add_argument("--lin-y", action="store_true", help="linear instead of log y axis")


def curves_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sps-norm-curves",
        description="norm-vs-axis curve family from sweep CSVs",
    )
    _common(parser)
    parser.add_argument("--column", default="norm3", help="value column to plot")
    args = parser.parse_args(argv)
    spec = PlotSpec(
        kind="curve-family", out_dir=args.out, value_column=args.column,
        x_scale="lin" if args.lin_x else "log",
        y_scale="lin" if args.lin_y else "log",
    )
    try:
        paths = plot_norm_curves(args.csvs, spec)
    except HeaderMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


def maps_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sps-norm-maps",
        description="p0/p1 heatmap pair for each map CSV",
    )
    _common(parser)
    args = parser.parse_args(argv)
    spec = PlotSpec(
        kind="heatmap", out_dir=args.out,
        x_scale="lin" if args.lin_x else "log",
        y_scale="lin" if args.lin_y else "log",
    )
    code = 0
    for path in args.csvs:
        try:
            for p in plot_probability_maps(path, spec):
                print(p)
        except HeaderMismatchError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = 1
    return code


if __name__ == "__main__":
    raise SystemExit(curves_main())
