"""Validation of the analysis artifacts plotkit consumes.

plotkit is a standalone consumer: it trusts nothing, re-validating every
input against the documented schemas before rendering. Failures name the
offending file and field path.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


class SchemaError(Exception):
    """An input file does not match its documented schema."""

    def __init__(self, path, field: str, reason: str):
        super().__init__(f"{path}: field {field!r}: {reason}")
        self.path = str(path)
        self.field = field
        self.reason = reason


def load_json(path, required: dict[str, type]) -> dict:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(path, "<file>", "not found")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(path, "<root>", f"not valid JSON ({exc})")
    if not isinstance(obj, dict):
        raise SchemaError(path, "<root>", "expected a JSON object")
    if obj.get("schema_version") != 1:
        raise SchemaError(path, "schema_version", f"unsupported: {obj.get('schema_version')!r}")
    for field, kind in required.items():
        if field not in obj:
            raise SchemaError(path, field, "missing")
        if kind is not None and not isinstance(obj[field], kind):
            raise SchemaError(path, field, f"expected {kind.__name__}")
    return obj


def load_csv(path, header: tuple[str, ...]) -> list[dict[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(path, "<file>", "not found")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = tuple(next(reader))
        except StopIteration:
            raise SchemaError(path, "<header>", "empty file")
        if got != header:
            raise SchemaError(path, "<header>", f"expected {','.join(header)}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(path, f"<line {line_no}>", "wrong field count")
            rows.append(dict(zip(header, row)))
    return rows


def parse_float(path, field: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SchemaError(path, field, f"not a number: {text!r}")


def load_comparison(path) -> dict:
    obj = load_json(
        path,
        {"axes": list, "sources": list, "footprints": list, "normalized": dict},
    )
    if len(obj["axes"]) != 8:
        raise SchemaError(path, "axes", f"expected 8 axes, got {len(obj['axes'])}")
    for source in obj["sources"]:
        vec = obj["normalized"].get(source)
        if not isinstance(vec, list) or len(vec) != 8:
            raise SchemaError(path, f"normalized.{source}", "expected an 8-vector")
    return obj


def load_radar_csv(path) -> dict:
    """radar.csv -> {axes: [...], sources: [...], normalized: {source: vec}}."""
    rows = load_csv(path, ("axis", "source", "raw", "normalized"))
    axes: list[str] = []
    sources: list[str] = []
    normalized: dict[str, dict[str, float]] = {}
    for row in rows:
        if row["axis"] not in axes:
            axes.append(row["axis"])
        if row["source"] not in sources:
            sources.append(row["source"])
        normalized.setdefault(row["source"], {})[row["axis"]] = parse_float(
            path, "normalized", row["normalized"]
        )
    if len(axes) != 8:
        raise SchemaError(path, "axis", f"expected 8 distinct axes, got {len(axes)}")
    vectors = {}
    for source in sources:
        missing = [a for a in axes if a not in normalized[source]]
        if missing:
            raise SchemaError(path, f"normalized.{source}", f"missing axes {missing}")
        vectors[source] = [normalized[source][a] for a in axes]
    return {"axes": axes, "sources": sources, "normalized": vectors}


def load_evals(path) -> list[dict]:
    header = ("model_id", "genotype_hex", "source", "budget_epochs", "fitness_test", "fitness_val")
    rows = load_csv(path, header)
    out = []
    for row in rows:
        out.append(
            {
                "model_id": row["model_id"],
                "source": row["source"],
                "budget": int(parse_float(path, "budget_epochs", row["budget_epochs"])),
                "fitness_test": parse_float(path, "fitness_test", row["fitness_test"]),
            }
        )
    return out


def load_fits(path) -> dict:
    obj = load_json(path, {"source": str, "budget": int, "fits": list})
    for fit in obj["fits"]:
        for field in ("family", "params", "loglik", "aic", "bic"):
            if field not in fit:
                raise SchemaError(path, f"fits[].{field}", "missing")
    return obj


def load_fdc(points_path, meta_path) -> tuple[list[tuple[int, float]], dict]:
    rows = load_csv(points_path, ("distance", "fitness"))
    points = [
        (int(parse_float(points_path, "distance", r["distance"])),
         parse_float(points_path, "fitness", r["fitness"]))
        for r in rows
    ]
    meta = load_json(meta_path, {"optimum_id": str, "n_points": int})
    return points, meta


def load_walk(path) -> list[tuple[int, float]]:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(path, "<file>", "not found")
    steps = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(path, f"<line {line_no}>", f"not valid JSON ({exc})")
        for field in ("t", "genotype", "fitness"):
            if field not in obj:
                raise SchemaError(path, f"<line {line_no}>.{field}", "missing")
        steps.append((int(obj["t"]), float(obj["fitness"])))
    if not steps:
        raise SchemaError(path, "<root>", "no steps")
    return steps


def load_smoothed(path) -> list[tuple[int, float]]:
    rows = load_csv(path, ("t", "fitness"))
    return [
        (int(parse_float(path, "t", r["t"])), parse_float(path, "fitness", r["fitness"]))
        for r in rows
    ]


def load_persistence_curve(path) -> list[tuple[float, float]]:
    rows = load_csv(path, ("n_percent", "persistence_percent"))
    return [
        (parse_float(path, "n_percent", r["n_percent"]),
         parse_float(path, "persistence_percent", r["persistence_percent"]))
        for r in rows
    ]
