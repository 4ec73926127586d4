"""Command line entry point: plotkit render --spec <json>."""

from __future__ import annotations

import argparse
import json
import sys

from .csvio import FormatError
from .figures import render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one figure from a JSON spec")
    p_render.add_argument("--spec", required=True, help="path to a PlotSpec JSON file")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0

    try:
        with open(args.spec) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        print(f"plotkit: cannot read spec: {e}", file=sys.stderr)
        return 2
    try:
        result = render(spec)
    except (FormatError, OSError, KeyError, TypeError) as e:
        print(f"plotkit: {e}", file=sys.stderr)
        return 2
    print(result.output)
    for k, v in sorted(result.extras.items()):
        print(f"{k}: {v}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
