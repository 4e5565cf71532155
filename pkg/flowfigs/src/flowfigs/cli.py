"""curveflow-plot: render figures from a completed experiment directory."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, PlotSpec, render
from .io import SchemaError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="curveflow-plot",
        description="Render a figure from curveflow CSV/JSON outputs.")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--run", required=True, help="experiment output directory")
    parser.add_argument("--out", required=True, help="output image path (.svg or .png)")
    parser.add_argument("--file", default=None,
                        help="specific CSV inside the run directory (kind-dependent)")
    parser.add_argument("--color-by", default=None,
                        help="snapshot column used for the curve color coding")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    options = {}
    if args.file:
        options["file"] = args.file
    if args.color_by:
        options["color_by"] = args.color_by
    try:
        path = render(PlotSpec(run_dir=args.run, kind=args.kind,
                               out_path=args.out, options=options))
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
