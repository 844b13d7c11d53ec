"""Command-line entry point.

Subcommands: sample, walk, analyze, footprint, compare. Every command is
deterministic given identical flags and inputs. Exit codes: 0 ok, 2 usage
error, 3 input/config problem (including EXHAUSTED sampling), 4 missing
data (EVAL_MISS and friends), 5 internal failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import (
    CellError,
    ConfigError,
    DecodeError,
    EvalMiss,
    FitscapeError,
    FootprintError,
    GenotypeError,
    MetricError,
    PersistenceError,
    SamplingError,
    TableError,
)
from .pipeline import (
    analyze_run,
    compare_footprints,
    footprint_run,
    load_config,
    sample_to_csv,
    walk_to_jsonl,
    write_comparison,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_DATA_MISS = 4
EXIT_INTERNAL = 5


def _usage_error(parser: argparse.ArgumentParser, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    parser.print_usage(sys.stderr)
    return EXIT_USAGE


def _resolve_seed(explicit: int | None, config_seed: int | None = None) -> int | None:
    """Seed precedence: flag, then config, then the FLA_SEED environment
    variable as a last resort."""
    if explicit is not None:
        return explicit
    if config_seed is not None:
        return config_seed
    env = os.environ.get("FLA_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("BAD_CONFIG", f"FLA_SEED is not an integer: {env!r}")
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fitscape",
        description="Fitness landscape footprint toolkit over binary cell genotypes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="sample cells to a model_id,genotype_hex CSV")
    p_sample.add_argument("--n", type=int, required=True, help="number of cells")
    p_sample.add_argument("--seed", type=int, default=None)
    p_sample.add_argument("--method", choices=("lhs", "uniform"), default="lhs")
    p_sample.add_argument("--out", required=True, help="output CSV path")

    p_walk = sub.add_parser("walk", help="random walk over the valid Hamming neighborhood")
    p_walk.add_argument("--config", required=True, help="run config JSON")
    p_walk.add_argument("--source", required=True, help="source name from the config")
    p_walk.add_argument("--budget", type=int, required=True)
    p_walk.add_argument("--steps", type=int, default=100)
    p_walk.add_argument("--seed", type=int, default=None)
    p_walk.add_argument(
        "--start", default="random", help="74-char genotype hex, or 'random' (seeded)"
    )
    p_walk.add_argument("--out", required=True, help="output JSONL path")

    p_analyze = sub.add_parser("analyze", help="full per-(source, budget) analysis")
    p_fp = sub.add_parser("footprint", help="assemble footprints from analyze outputs")
    for sub_parser in (p_analyze, p_fp):
        sub_parser.add_argument("--config", required=True)
        sub_parser.add_argument(
            "--out", default=None, help="output dir (default: config output_dir)"
        )
        # every config knob stays overridable from the command line
        sub_parser.add_argument("--seed", type=int, default=None)
        sub_parser.add_argument("--samples", type=int, default=None)
        sub_parser.add_argument("--walk-steps", dest="walk_steps", type=int, default=None)
        sub_parser.add_argument("--nmax", type=float, default=None)
        sub_parser.add_argument("--window", type=int, default=None)
        sub_parser.add_argument("--b-ref", dest="b_ref", type=int, default=None)

    p_cmp = sub.add_parser("compare", help="compare footprint JSON files")
    p_cmp.add_argument("footprints", nargs="+", help="footprint.json paths (need >= 2)")
    p_cmp.add_argument("--out-json", required=True)
    p_cmp.add_argument("--out-csv", required=True)

    return parser


def _config_with_overrides(args: argparse.Namespace):
    import dataclasses

    config = load_config(args.config)
    overrides = {
        name: getattr(args, name)
        for name in ("seed", "samples", "walk_steps", "nmax", "window", "b_ref")
        if getattr(args, name, None) is not None
    }
    return dataclasses.replace(config, **overrides) if overrides else config


def _run(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.command == "sample":
        if args.n < 1:
            return _usage_error(parser, "--n must be >= 1")
        seed = _resolve_seed(args.seed)
        if seed is None:
            return _usage_error(parser, "supply --seed (or set FLA_SEED)")
        if seed < 0:
            return _usage_error(parser, "--seed must be nonnegative")
        sample_to_csv(args.n, seed, args.method, args.out)
        return EXIT_OK

    if args.command == "walk":
        if args.steps < 0:
            return _usage_error(parser, "--steps must be >= 0")
        config = load_config(args.config)
        seed = _resolve_seed(args.seed, config.seed)
        if seed is None or seed < 0:
            return _usage_error(parser, "supply a nonnegative --seed")
        start_hex = None if args.start == "random" else args.start
        trace = walk_to_jsonl(
            config, args.source, args.budget, args.steps, seed, start_hex, args.out
        )
        print(f"walked {len(trace) - 1} steps from {trace.steps[0].to_hex()}")
        return EXIT_OK

    if args.command == "analyze":
        config = _config_with_overrides(args)
        analyze_run(config, args.out or config.output_dir)
        return EXIT_OK

    if args.command == "footprint":
        config = _config_with_overrides(args)
        footprint_run(config, args.out or config.output_dir)
        return EXIT_OK

    if args.command == "compare":
        if len(args.footprints) < 2:
            return _usage_error(parser, "need at least two footprints to compare (TOO_FEW)")
        report = compare_footprints([Path(p) for p in args.footprints])
        write_comparison(report, args.out_json, args.out_csv)
        return EXIT_OK

    return _usage_error(parser, f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args, parser)
    except EvalMiss as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_MISS
    except PersistenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_MISS
    except GenotypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FootprintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if exc.code == "TOO_FEW" else EXIT_INPUT
    except (ConfigError, TableError, SamplingError, CellError, MetricError, DecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FitscapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
