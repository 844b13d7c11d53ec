"""plotkit command line: one positional spec file, or flags per figure kind.

Exit codes: 0 ok, 2 usage, 3 invalid input (schema violation, naming the
failing field). A failed render never leaves an output file behind.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import figures
from .schemas import SchemaError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render SVG figures from fitscape artifacts."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser("render", help="render one FigureSpec JSON file")
    p_render.add_argument("spec", help="FigureSpec path")

    p_radar = sub.add_parser("radar", help="footprint radar from a comparison report")
    group = p_radar.add_mutually_exclusive_group(required=True)
    group.add_argument("--comparison", help="comparison.json")
    group.add_argument("--radar-csv", help="radar.csv")
    p_radar.add_argument("--out", required=True)
    p_radar.add_argument("--title", default=None)

    p_pdf = sub.add_parser("pdf", help="fitness PDF with fitted curves")
    p_pdf.add_argument("--evals", required=True)
    p_pdf.add_argument("--fits", required=True)
    p_pdf.add_argument("--out", required=True)
    p_pdf.add_argument("--title", default=None)

    p_cdf = sub.add_parser("cdf", help="fitness CDF against theoretical CDFs")
    p_cdf.add_argument("--evals", required=True)
    p_cdf.add_argument("--fits", required=True)
    p_cdf.add_argument("--out", required=True)
    p_cdf.add_argument("--title", default=None)

    p_fdc = sub.add_parser("fdc", help="fitness-distance scatter")
    p_fdc.add_argument("--points", required=True, help="fdc.csv")
    p_fdc.add_argument("--meta", required=True, help="fdc_meta.json")
    p_fdc.add_argument("--out", required=True)
    p_fdc.add_argument("--title", default=None)

    p_walk = sub.add_parser("walk", help="random-walk route with given smoothing")
    p_walk.add_argument("--walk", required=True, help="walk.jsonl")
    p_walk.add_argument("--smoothed", default=None, help="walk_smoothed.csv")
    p_walk.add_argument("--out", required=True)
    p_walk.add_argument("--title", default=None)

    p_persist = sub.add_parser("persistence", help="persistence bars")
    p_persist.add_argument("--curves", nargs="+", required=True, help="curve CSV paths")
    p_persist.add_argument("--out", required=True)
    p_persist.add_argument("--title", default=None)

    return parser


def _spec_from_args(args: argparse.Namespace) -> dict:
    style = {"title": args.title} if getattr(args, "title", None) else {}
    if args.command == "radar":
        inputs = (
            {"comparison": args.comparison} if args.comparison else {"radar_csv": args.radar_csv}
        )
    elif args.command in ("pdf", "cdf"):
        inputs = {"evals": args.evals, "fits": args.fits}
    elif args.command == "fdc":
        inputs = {"points": args.points, "meta": args.meta}
    elif args.command == "walk":
        inputs = {"walk": args.walk}
        if args.smoothed:
            inputs["smoothed"] = args.smoothed
    elif args.command == "persistence":
        inputs = {"curves": list(args.curves)}
    else:
        raise SchemaError("<args>", "command", f"unknown command {args.command!r}")
    return {"kind": args.command, "inputs": inputs, "out": args.out, "style": style}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "render":
            spec_path = Path(args.spec)
            if not spec_path.is_file():
                raise SchemaError(spec_path, "<file>", "not found")
            try:
                spec = json.loads(spec_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise SchemaError(spec_path, "<root>", f"not valid JSON ({exc})")
            if not isinstance(spec, dict):
                raise SchemaError(spec_path, "<root>", "expected a JSON object")
            figures.render(spec)
        else:
            figures.render(_spec_from_args(args))
        return EXIT_OK
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
