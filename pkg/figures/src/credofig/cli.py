"""CLI: `credofig render --spec <file>`."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import SpecError, load_spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="credofig")
    subs = parser.add_subparsers(dest="command", required=True)
    rend = subs.add_parser("render")
    rend.add_argument("--spec", required=True, help="YAML figure spec")
    args = parser.parse_args(argv)
    try:
        result = render(load_spec(args.spec))
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
