"""Command-line front end.

    fixgen SUBCOMMAND --config run.json --out results/ [--seed N] [--theta-terms N]

Exit status: 0 when every postcondition holds, 1 when one fails, 2 for an
invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError
from .report import dumps_report, load_config, run_suite, write_outputs

COMMANDS = {
    "certify": ["certify"],
    "perturb-fix": ["perturb_fix"],
    "perturb-drift": ["perturb_drift", "boundary_drift"],
    "orbit": ["orbit"],
    "lur": ["lur"],
    "demo-01law": ["demo_01law"],
    "suite": None,
}


def build_parser():
    p = argparse.ArgumentParser(prog="fixgen", description="Generic fixed point experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="JSON experiment config")
        s.add_argument("--out", default=None, help="output directory (report.json and CSVs)")
        s.add_argument("--seed", type=int, default=None, help="override the config seed")
        s.add_argument("--theta-terms", type=int, default=None, help="terms of the Theta metric")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config["seed"] = args.seed
        if args.theta_terms is not None:
            config["theta_terms"] = args.theta_terms
        stages = COMMANDS[args.command]
        if stages is not None:
            present = [s for s in stages if s in config]
            if not present:
                raise ConfigError(f"config has no {stages[0]!r} section", "/" + stages[0])
            stages = present
        report, tables, timings = run_suite(config, stages)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    if args.out:
        write_outputs(args.out, report, tables, timings)
    else:
        sys.stdout.write(dumps_report(report))
    print(json.dumps({s: v["pass"] for s, v in report["stages"].items()}), file=sys.stderr)
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
