"""Command-line entry point: ``phtraffic {simulate,stability,invariant,acf}``."""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .config import ScenarioConfig, load_config, validate
from .errors import PHTrafficError


def _u64(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phtraffic",
        description="Stochastic port-Hamiltonian car-following model on a ring.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "Monte Carlo alpha sweep; writes summary.ndjson and energy_by_alpha.csv",
        "stability": "stability predicates over a parameter grid; writes stability.csv",
        "invariant": "stationary covariance vs. ensemble estimate",
        "acf": "speed autocorrelation per alpha; writes acf.csv",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="scenario file (key = value lines)")
        p.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--jobs", type=_positive, default=experiments.default_jobs(),
                       help="worker processes (default: CPU count)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        scenario = load_config(args.config) if args.config else validate(ScenarioConfig())
        scenario = scenario.with_overrides(seed=args.seed, output_dir=args.out)
        if args.command == "simulate":
            runs = experiments.run_simulate(scenario, jobs=args.jobs)
            return 1 if experiments.any_failed(runs) else 0
        if args.command == "stability":
            experiments.run_stability(scenario)
        elif args.command == "invariant":
            experiments.run_invariant(scenario, jobs=args.jobs)
        elif args.command == "acf":
            experiments.run_acf(scenario, jobs=args.jobs)
    except (PHTrafficError, OSError, ValueError) as exc:
        print(f"phtraffic {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
