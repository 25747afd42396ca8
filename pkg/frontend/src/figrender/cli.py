"""Command line entry point: one figure per invocation."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureJob, Style, render
from .schemas import KINDS, SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a study figure from a harness CSV file.",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument(
        "--in", dest="src", required=True, metavar="CSV", help="input table"
    )
    parser.add_argument(
        "--out", required=True, metavar="FILE", help="image path (default SVG)"
    )
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)

    job = FigureJob(
        kind=args.kind,
        inputs=(args.src,),
        output=args.out,
        style=Style(title=args.title),
    )
    try:
        render(job)
    except SchemaError as exc:
        print(f"render: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        # unreadable input or unwritable output is a precondition
        # failure, same exit code as a schema mismatch
        print(f"render: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
