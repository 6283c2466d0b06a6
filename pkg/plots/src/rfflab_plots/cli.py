"""Render one figure from result CSVs: rfflab-render --figure fig1 --in a.csv --out fig1.png"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_IDS, FigureSpec, SchemaError, render


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SchemaError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="rfflab-render", description=__doc__)
    parser.add_argument("--figure", required=True, choices=list(FIGURE_IDS),
                        help="which figure to draw")
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="CSV", help="input CSV path (repeatable)")
    parser.add_argument("--out", required=True, help="output image path (.png or .pdf)")
    parser.add_argument("--no-reference-line", action="store_true",
                        help="suppress the inverse-square-root guide line")
    parser.add_argument("--clip-percentile", type=float, default=99.0,
                        help="heatmap color clip percentile (default 99)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    try:
        spec = FigureSpec(
            figure=args.figure,
            inputs=tuple(args.inputs),
            output=args.out,
            reference_slope=not args.no_reference_line,
            clip_percentile=args.clip_percentile,
        )
        path = render(spec)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
