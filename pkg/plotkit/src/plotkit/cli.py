"""Command line for rendering dopocat artifacts: plotkit <kind> <inputs> -o out.png"""
from __future__ import annotations

import argparse
import sys

from .figures import DEFAULT_THRESHOLD, FigureSpec, render
from .schemas import SchemaError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render dopocat CSV artifacts to PNG figures.")
    sub = parser.add_subparsers(dest="kind", required=True)

    ts = sub.add_parser("timeseries",
                        help="qualifier evolution panels from a timeseries CSV")
    ts.add_argument("timeseries_csv")

    hm = sub.add_parser("heatmap",
                        help="sweep grid with threshold boundary overlay")
    hm.add_argument("points_csv")
    hm.add_argument("boundary_csv")

    wg = sub.add_parser("wigner", help="Wigner section heatmap")
    wg.add_argument("section_csv")

    for p in (ts, hm, wg):
        p.add_argument("-o", "--output", required=True,
                       help="output image path (PNG)")
    for p in (ts, hm):
        p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                       help=f"entanglement threshold (default "
                            f"{DEFAULT_THRESHOLD})")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.kind == "heatmap":
        inputs = (args.points_csv, args.boundary_csv)
    elif args.kind == "timeseries":
        inputs = (args.timeseries_csv,)
    else:
        inputs = (args.section_csv,)
    threshold = getattr(args, "threshold", DEFAULT_THRESHOLD)
    try:
        spec = FigureSpec(kind=args.kind, inputs=inputs, output=args.output,
                          threshold=threshold)
        written = render(spec)
    except (SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(written)
    return 0


if __name__ == "__main__":
    sys.exit(main())
