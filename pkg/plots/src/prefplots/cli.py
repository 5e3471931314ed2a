"""Batch figure rendering from benchmark CSVs.

    plot --kind {surface,noise,margin,hist} --in results.csv --out fig.png
         [--group model_kind,reward_family] [--title ...]
"""

from __future__ import annotations

import argparse
import sys

from .csvio import PlotInputError
from .figures import DEFAULT_GROUP_BY, FigureKind, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plot", description=__doc__)
    parser.add_argument("--kind", required=True, choices=[k.value for k in FigureKind])
    parser.add_argument("--in", dest="input_csv", required=True)
    parser.add_argument("--out", dest="output_path", required=True)
    parser.add_argument("--group", default=",".join(DEFAULT_GROUP_BY),
                        help="comma-separated grouping columns (results kinds only)")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        input_csv=args.input_csv,
        figure_kind=FigureKind(args.kind),
        output_path=args.output_path,
        group_by=tuple(c for c in args.group.split(",") if c),
        title=args.title,
    )
    try:
        written = render(spec)
    except (PlotInputError, OSError) as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
