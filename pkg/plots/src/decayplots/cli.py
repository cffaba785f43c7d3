"""Command line: decayplots render --in series.csv [--fit fit.json]
--compensate t2|tlogt|logt --out fig.png"""

from __future__ import annotations

import argparse
import json
import sys

from .render import COMPENSATIONS, PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="decayplots")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render a compensated decay figure")
    r.add_argument("--in", dest="series", required=True, help="series CSV")
    r.add_argument("--fit", dest="fit", default=None, help="fit JSON overlay")
    r.add_argument(
        "--compensate", default="none", choices=sorted(COMPENSATIONS),
        help="compensation applied to |K(t)|",
    )
    r.add_argument("--out", required=True, help="output PNG path")
    r.add_argument("--pairs", default=None, help="comma list of pair ids")
    r.add_argument("--logy", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = PlotSpec(
            series_csv=args.series,
            out_path=args.out,
            compensation=args.compensate,
            fit_json=args.fit,
            logy=args.logy,
            pair_ids=tuple(args.pairs.split(",")) if args.pairs else (),
        )
        path = render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
