"""CLI: python -m wfsound_plots --csv bench.csv --out plots/
[--timeout-line SECS]"""

import argparse
import sys

from .report import render_plots


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="wfsound_plots")
    parser.add_argument("--csv", required=True, help="bench CSV file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--timeout-line", type=float, default=None,
                        metavar="SECS")
    args = parser.parse_args(argv)
    try:
        images = render_plots(args.csv, args.out,
                              timeout_line=args.timeout_line)
    except (OSError, ValueError) as exc:
        print(f"wfsound_plots: {exc}", file=sys.stderr)
        return 1
    for image in images:
        print(image)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
