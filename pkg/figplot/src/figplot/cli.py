"""Command line for rendering one panel per invocation.

Exit codes: 0 success, 2 bad inputs (the message names the missing column
or offending file).
"""

from __future__ import annotations

import argparse
import sys

from . import PANEL_X_LABELS, FigureError, FigureSpec, render_panel, sidecar_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figplot",
        description="Render agingmimo sweep CSVs into a figure panel")
    parser.add_argument("--panel", required=True, choices=sorted(PANEL_X_LABELS),
                        help="which axis the CSVs were swept over")
    parser.add_argument("--csv", nargs="+", required=True, metavar="PATH",
                        help="one sweep CSV per curve")
    parser.add_argument("--labels", nargs="+", required=True, metavar="LABEL",
                        help="legend labels, one per CSV")
    parser.add_argument("--out", required=True,
                        help="output image path (sidecar goes to <out>.points.json)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(csvs=tuple(args.csv), panel=args.panel,
                          labels=tuple(args.labels), out=args.out)
        payload = render_panel(spec)
    except FigureError as exc:
        print(f"figplot error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out} ({len(payload['series'])} series) "
          f"and {sidecar_path(args.out)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
