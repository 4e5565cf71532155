"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 integration failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .flows import FlowIntegrationError
from .geometry import ClosureProjectionError
from .harness import (
    ConfigError,
    load_config,
    run_experiment,
    validate_config,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="curveflow",
        description="Gradient flows of closed planar curves with embedded densities.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run an experiment from a config file")
    p_sim.add_argument("--config", required=True, help="JSON config path")

    p_ops = sub.add_parser("operators", help="dump Helmholtz/incompressibility spectra")
    p_ops.add_argument("--curve", required=True,
                       choices=["circle", "perturbed_circle", "trillium"])
    p_ops.add_argument("--out", required=True, help="output directory")
    p_ops.add_argument("--n-points", type=int, default=256)

    p_gam = sub.add_parser("gamma", help="sharp-interface limit study; prints JSON")
    p_gam.add_argument("--config", required=True)

    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("--config", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            summary, outdir = run_experiment(load_config(args.config))
            print(json.dumps({"output_dir": outdir, "summary": summary},
                             indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "operators":
            config = {"experiment": "operators", "output_dir": args.out,
                      "curve": {"name": args.curve},
                      "grid": {"n_points": args.n_points}}
            summary, outdir = run_experiment(config)
            print(json.dumps({"output_dir": outdir, "summary": summary},
                             indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "gamma":
            config = load_config(args.config)
            config["experiment"] = "gamma-convergence"
            summary, outdir = run_experiment(config)
            print(json.dumps(summary, indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "validate":
            resolved = validate_config(args.config)
            print(json.dumps({"valid": True, "resolved": resolved},
                             indent=2, sort_keys=True))
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FlowIntegrationError, ClosureProjectionError) as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
