"""Command line for figure generation.

    capflow-plots --kind traces    --trace run/trace.csv --out entropy.png
    capflow-plots --kind profiles  --snapshot a.json --snapshot b.json --out p.svg
    capflow-plots --kind embedding --snapshot body.json --out curve.png

Exit codes: 0 success, 1 schema mismatch in an input file, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotSpec, render
from .schema import SchemaMismatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capflow-plots",
                                     description=__doc__)
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--trace", action="append", default=[],
                        help="trace CSV (repeatable)")
    parser.add_argument("--snapshot", action="append", default=[],
                        help="body snapshot JSON (repeatable)")
    parser.add_argument("--out", required=True, help="output image "
                        "(PNG or SVG by extension)")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        spec = PlotSpec(kind=args.kind, output=args.out,
                        traces=args.trace, snapshots=args.snapshot)
        path = render(spec)
    except SchemaMismatch as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
