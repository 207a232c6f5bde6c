"""Command line driver: render one figure or all of them."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_IDS, render, spec_for
from .io import ArtifactError

EXIT_OK = 0
EXIT_ARTIFACT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figscripts",
        description="Render figure analogues from an artifact tree.",
    )
    parser.add_argument(
        "--artifacts",
        required=True,
        help="root directory holding one subdirectory per producing run",
    )
    parser.add_argument(
        "--out", default="figures", help="directory for the rendered images"
    )
    parser.add_argument(
        "--only",
        type=int,
        action="append",
        metavar="ID",
        help="figure id to render (repeatable); default: all",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    ids = tuple(args.only) if args.only else FIGURE_IDS
    try:
        for fid in ids:
            spec = spec_for(fid, args.artifacts, args.out)
            render(spec)
            print(f"wrote {spec.output}")
    except ArtifactError as exc:
        print(f"figscripts: {exc}", file=sys.stderr)
        return EXIT_ARTIFACT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
