"""Command-line entry point: ``zenopass run|figure|plot-spec``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .dynamics import IntegrationError
from .experiment.config import ConfigError, load_config
from .experiment.figures import FIGURES, run_figure
from .experiment.output import PlotSpecError, emit_plot_spec
from .experiment.runner import OUTPUT_ENV, PointFailure, default_output_dir, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _workers(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("workers must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zenopass", description="Accelerated Zeno-passage simulations.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config (single point or sweep)")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path, default=None,
                     help=f"output directory (default: config 'output', then ${OUTPUT_ENV})")
    run.add_argument("--workers", type=_workers, default=None)

    fig = sub.add_parser("figure", help="run a figure preset")
    fig.add_argument("figure", choices=sorted(FIGURES))
    fig.add_argument("--out", type=Path, default=None, help=f"output directory (default: ${OUTPUT_ENV}/<figure>)")
    fig.add_argument("--workers", type=_workers, default=1)

    ps = sub.add_parser("plot-spec", help="write a line-chart spec for columns of a CSV")
    ps.add_argument("csv", type=Path)
    ps.add_argument("--x", default="t")
    ps.add_argument("--y", action="append", required=True, help="column to plot; repeatable")
    ps.add_argument("--title", default="")
    ps.add_argument("--out", type=Path, default=None, help="spec path (default: <csv stem>.plot.json)")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            m = run_scenario(cfg, args.out, args.workers)
            print(f"{m.n_points} point(s), {m.n_failed} failed -> {m.out_dir}")
        elif args.command == "figure":
            out = args.out if args.out is not None else default_output_dir() / args.figure
            m = run_figure(args.figure, out, args.workers)
            print(f"{args.figure}: {len(m['panels'])} panel(s) in {m['duration_s']:.1f} s -> {out}")
        else:
            out = args.out if args.out is not None else args.csv.with_suffix(".plot.json")
            series = [{"csv": args.csv, "x": args.x, "y": y, "label": y} for y in args.y]
            emit_plot_spec(out, series, title=args.title)
            print(out)
    except (ConfigError, PlotSpecError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PointFailure, IntegrationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
