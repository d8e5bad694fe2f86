"""CLI wrapper around the figure renderer."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, InputError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="coreset-plots",
                                     description="Render figures from run outputs")
    parser.add_argument("--inputs", required=True, help="glob of run CSV files")
    parser.add_argument("--kind", required=True, choices=["trace", "hotstart", "ratio"])
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--group-by", default="optimizer",
                        help="comma-separated config keys to group runs by")
    parser.add_argument("--baseline", default="optimizer=hotdog",
                        help="key=value pairs (comma-separated) naming the ratio baseline")
    args = parser.parse_args(argv)

    baseline = {}
    for pair in args.baseline.split(","):
        key, _, value = pair.partition("=")
        if value:
            baseline[key.strip()] = value.strip()
    spec = FigureSpec(inputs=args.inputs, kind=args.kind, out=args.out,
                      group_by=tuple(k.strip() for k in args.group_by.split(",")),
                      baseline=baseline)
    try:
        path = render(spec)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
