"""
Command-line entry point ``elaa-isac-sim``.

Exit codes: 0 success, 2 configuration error, 3 runtime or calibration error.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import ConfigError, ElaaIsacError
from .config import default_scenario, load_scenario
from .experiments import EXPERIMENTS, run_experiment, tradeoff_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def build_parser():
    p = argparse.ArgumentParser(
        prog="elaa-isac-sim",
        description="Near-field ELAA ISAC experiments: figure tables and the rate/detection trade-off.",
    )
    p.add_argument("experiment", choices=EXPERIMENTS + ("tradeoff",))
    p.add_argument("--config", help="scenario file (flat TOML); defaults to the packaged scenario")
    p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    p.add_argument("--trials", type=int, help="detection trials per point")
    p.add_argument("--out", help="output directory")
    p.add_argument("--svg", action="store_true", help="also write an SVG line plot")
    p.add_argument("--full", action="store_true",
                   help="lift the desk-scale caps on antennas and trials")
    p.add_argument("--workers", type=int, help="parallel trade-off cases")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.config) if args.config else default_scenario()
        changes = {}
        if args.seed is not None:
            changes["seed"] = args.seed
        if args.trials is not None:
            changes["trials"] = args.trials
        if args.out is not None:
            changes["output_dir"] = args.out
        if args.workers is not None:
            changes["workers"] = args.workers
        if changes:
            scenario = scenario.replace(**changes)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.experiment == "tradeoff":
            res = tradeoff_sweep(scenario, full=args.full, svg=args.svg, write=True)
            skipped = [r[1] for r in res.manifest.rows if r[-1] != "run"]
            print(f"tradeoff: {len(res.curves)} cases x {len(scenario.rhos)} rho points, "
                  f"{res.trials} trials -> {scenario.output_dir}")
            if skipped:
                print(f"skipped (desk caps, pass --full): {', '.join(skipped)}")
        else:
            tables = run_experiment(args.experiment, scenario, svg=args.svg)
            names = ", ".join(f"{t.name}.csv" for t in tables)
            print(f"{args.experiment}: wrote {names} -> {scenario.output_dir}")
    except ElaaIsacError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
