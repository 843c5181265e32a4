"""Standalone plot command: ``plot <kind> <csv...> -o <image>``."""

from __future__ import annotations

import argparse
import sys

from figplots.render import KINDS, PlotJob, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render a figure from noiseaid experiment CSVs."
    )
    parser.add_argument("kind", choices=KINDS, help="figure kind")
    parser.add_argument("inputs", nargs="+", metavar="csv", help="input CSV file(s)")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(PlotJob(kind=args.kind, inputs=args.inputs, output=args.output))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
