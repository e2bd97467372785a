"""CLI: render sweep summaries as charts or a text table.

    plots offsets --in summary.csv --out offsets.svg
    plots slope   --in summary.csv --out slope.svg
    plots table   --in summary.csv
"""

from __future__ import annotations

import argparse
import sys

from .charts import offsets_figure, save_figure, slope_figure
from .summary import SummaryFormatError, load_summary
from .table import format_table


def cmd_offsets(args) -> int:
    fig = offsets_figure(load_summary(args.input))
    save_figure(fig, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_slope(args) -> int:
    fig = slope_figure(load_summary(args.input))
    save_figure(fig, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_table(args) -> int:
    sys.stdout.write(format_table(load_summary(args.input)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plots", description="Charts and tables from eovsim sweep summaries.")
    sub = parser.add_subparsers(dest="command", required=True)

    offsets = sub.add_parser("offsets", help="offset-by-block chart, one line per delay")
    offsets.add_argument("--in", dest="input", required=True, help="summary CSV")
    offsets.add_argument("--out", required=True, help="image path (format by extension, e.g. .svg)")
    offsets.set_defaults(fn=cmd_offsets)

    slope = sub.add_parser("slope", help="offset-growth-by-delay chart")
    slope.add_argument("--in", dest="input", required=True, help="summary CSV")
    slope.add_argument("--out", required=True, help="image path")
    slope.set_defaults(fn=cmd_slope)

    table = sub.add_parser("table", help="print the summary as a text table")
    table.add_argument("--in", dest="input", required=True, help="summary CSV")
    table.set_defaults(fn=cmd_table)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SummaryFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
