"""Command line entry point: plots <figure-kind> --in ... --out ..."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, render
from .readers import ParseError


def _parser():
    ap = argparse.ArgumentParser(
        prog="plots", description="Render figures from assimilation run outputs."
    )
    sub = ap.add_subparsers(dest="kind", required=True, metavar="|".join(KINDS))
    about = {
        "contour": "filled contours of one field, or a shared-scale pair",
        "surface": "3-D surface view of one field snapshot",
        "series": "every diagnostic column of one run against time",
        "overlay": "one diagnostic column from several runs on one axes",
    }
    for kind in KINDS:
        p = sub.add_parser(kind, help=about[kind])
        p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="PATH",
                       help="input file(s): .ensf1 snapshots or diagnostics CSVs")
        p.add_argument("--out", required=True, help="image file to write")
        p.add_argument("--label", action="append", default=[],
                       help="panel/legend label, once per input")
        if kind == "overlay":
            p.add_argument("--column", default="rmse", help="CSV column to overlay")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        spec = FigureSpec(
            kind=args.kind,
            inputs=tuple(args.inputs),
            out=args.out,
            labels=tuple(args.label),
            column=getattr(args, "column", "rmse"),
        )
        print(render(spec))
    except (ParseError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    return 0
