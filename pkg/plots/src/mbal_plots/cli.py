"""Command-line entry point: render one figure from result CSVs."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .figures import KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbal-clo-plot",
        description="Render figures from mbal-clo result CSVs.",
    )
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument(
        "--in", dest="inputs", action="append", required=True, metavar="CSV",
        help="input CSV (repeatable; one per curve or point)",
    )
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument(
        "--linear-y", action="store_true",
        help="linear y axis (default is logarithmic where the kind supports it)",
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            inputs=tuple(Path(p) for p in args.inputs),
            kind=args.kind,
            out=Path(args.out),
            log_y=not args.linear_y,
        )
        out = render(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
