"""Command line front end for running experiments and rendering plots."""

import argparse
import sys

from .harness import ParseError, ValidationError, parse_config, run_experiment
from .plots import emit_plots


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cgm-bench",
        description="Run constrained gradient method benchmarks and emit CSV/SVG.",
    )
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--problem", choices=["rap", "hbg"])
    parser.add_argument("--d", type=int, help="problem dimension")
    parser.add_argument("--beta", type=float, help="game parameter in (0, 1)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--iters", help="comma-separated horizons, e.g. 100,1000")
    parser.add_argument("--schedule", choices=["constant", "varying"])
    parser.add_argument("--baselines", action="store_true", default=None)
    parser.add_argument("--check-bounds", action="store_true", default=None)
    parser.add_argument("--out", help="output directory (default: results)")
    parser.add_argument("--plots", action="store_true", help="render SVGs after the run")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {
        "problem": args.problem,
        "d": args.d,
        "beta": args.beta,
        "seed": args.seed,
        "iters": args.iters,
        "schedule": args.schedule,
        "baselines": args.baselines,
        "check_bounds": args.check_bounds,
        "out": args.out,
    }
    try:
        config = parse_config(args.config, overrides)
        summary = run_experiment(config)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in summary["files"]:
        print(path)
    for path, report in summary["reports"].items():
        status = "pass" if report.all_pass else "FAIL"
        print(f"bounds[{report.track}] {status}: {path}")
    if args.plots:
        for path in emit_plots(summary["files"], config.out_dir):
            print(path)
    return summary["exit_code"]


if __name__ == "__main__":
    raise SystemExit(main())
