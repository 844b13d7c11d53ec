"""Footprint assembly and cross-source comparison.

A footprint condenses one landscape, i.e. one (source, budget) pair, into
eight metrics: mean and variance of fitness, walk ruggedness tau, the
local-optima count, and positive/negative persistence with their AuCs.
Every slot is either a finite value or an explicit flag; nothing is
silently absent. Comparisons min-max normalize each axis across the
compared set so sources can be drawn on one radar; raw orientation is
kept (no lower-is-better inversion) because tau admits both readings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Generic, Sequence, TypeVar

from .errors import FootprintError
from .fitness import SourceId
from .metrics import FitnessStats, LocalOptimaResult, RuggednessResult
from .persistence import PersistenceSummary

AXES = (
    "mean",
    "variance",
    "tau",
    "n_local_optima",
    "pos_p",
    "pos_auc",
    "neg_p",
    "neg_auc",
)

SCHEMA_VERSION = 1

T = TypeVar("T")


@dataclass(frozen=True)
class Labeled(Generic[T]):
    """An analysis result tagged with its landscape and provenance id."""

    value: T
    source: SourceId
    budget: int
    analysis_id: str


@dataclass(frozen=True)
class Footprint:
    source: SourceId
    budget: int
    metrics: dict[str, float | int | None]  # one entry per axis; None iff flagged
    flags: dict[str, str]
    provenance: tuple[str, ...]

    def __post_init__(self) -> None:
        if set(self.metrics) != set(AXES):
            raise FootprintError(
                "SOURCE_MISMATCH", f"metrics must cover exactly the axes {AXES}"
            )
        for axis, value in self.metrics.items():
            if value is None and axis not in self.flags:
                raise FootprintError(
                    "SOURCE_MISMATCH", f"axis {axis} is absent but carries no flag"
                )

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "source": self.source.name,
            "kind": self.source.kind,
            "budget": self.budget,
            "metrics": {axis: self.metrics[axis] for axis in AXES},
            "flags": dict(sorted(self.flags.items())),
            "provenance": list(self.provenance),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Footprint":
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise FootprintError(
                "SOURCE_MISMATCH",
                f"unsupported footprint schema_version {obj.get('schema_version')!r}",
            )
        return cls(
            source=SourceId(obj["source"], obj.get("kind", "TABULAR")),
            budget=int(obj["budget"]),
            metrics={axis: obj["metrics"][axis] for axis in AXES},
            flags=dict(obj.get("flags", {})),
            provenance=tuple(obj.get("provenance", ())),
        )


def _check_labels(inputs: Sequence[Labeled]) -> tuple[SourceId, int]:
    first = inputs[0]
    for other in inputs[1:]:
        if other.source.name != first.source.name:
            raise FootprintError(
                "SOURCE_MISMATCH",
                f"inputs mix sources {first.source.name!r} and {other.source.name!r}",
            )
        if other.budget != first.budget:
            raise FootprintError(
                "BUDGET_MISMATCH",
                f"inputs mix budgets {first.budget} and {other.budget}",
            )
    return first.source, first.budget


def build_footprint(
    stats: Labeled[FitnessStats],
    rugged: Labeled[RuggednessResult | None],
    optima: Labeled[LocalOptimaResult],
    pos: Labeled[PersistenceSummary],
    neg: Labeled[PersistenceSummary],
) -> Footprint:
    """Assemble the eight-metric footprint from per-landscape analyses.

    All five inputs must be labeled with the same (source, budget);
    mismatches raise SOURCE_MISMATCH or BUDGET_MISMATCH. A landscape
    without a walk (rugged.value is None) gets its tau slot flagged
    NO_WALK instead of a value.
    """
    source, budget = _check_labels([stats, rugged, optima, pos, neg])
    flags: dict[str, str] = {}
    rr = rugged.value
    if rr is None:
        tau: float | None = None
        flags["tau"] = "NO_WALK"
    else:
        tau = rr.tau
        if rr.flag is not None:
            flags["tau"] = rr.flag
            tau = None
    if optima.value.estimate:
        flags["n_local_optima"] = "ESTIMATE"
    metrics: dict[str, float | int | None] = {
        "mean": stats.value.mean,
        "variance": stats.value.std**2,
        "tau": tau,
        "n_local_optima": optima.value.count,
        "pos_p": pos.value.p_at_nmax,
        "pos_auc": pos.value.auc,
        "neg_p": neg.value.p_at_nmax,
        "neg_auc": neg.value.auc,
    }
    return Footprint(
        source=source,
        budget=budget,
        metrics=metrics,
        flags=flags,
        provenance=tuple(inp.analysis_id for inp in (stats, rugged, optima, pos, neg)),
    )


def normalize_for_radar(footprints: Sequence[Footprint]) -> list[list[float]]:
    """Per-axis min-max scaling across the compared set, into [0, 1].

    Flagged (absent) values map to 0; an axis whose finite values are all
    equal maps them to 0.5 so the radar stays readable. ESTIMATE does not
    hide the optima count; only value-less flags (e.g. tau) do.
    """
    if len(footprints) < 2:
        raise FootprintError("TOO_FEW", "need at least two footprints to compare")
    vectors: list[list[float]] = []
    per_axis: dict[str, list[float]] = {}
    for axis in AXES:
        finite = [
            float(fp.metrics[axis]) for fp in footprints if fp.metrics[axis] is not None
        ]
        if not finite:
            raise FootprintError("ALL_FLAGGED", f"axis {axis} is flagged in every footprint", axis=axis)
        per_axis[axis] = finite
    for fp in footprints:
        vec: list[float] = []
        for axis in AXES:
            value = fp.metrics[axis]
            if value is None:
                vec.append(0.0)
                continue
            lo, hi = min(per_axis[axis]), max(per_axis[axis])
            if hi == lo:
                vec.append(0.5)
            else:
                vec.append((float(value) - lo) / (hi - lo))
        vectors.append(vec)
    return vectors


@dataclass(frozen=True)
class ComparisonReport:
    """Raw footprints, normalized radar vectors, and per-axis rankings."""

    footprints: tuple[Footprint, ...]
    normalized: tuple[tuple[float, ...], ...]
    rankings: dict[str, list[dict]]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "axes": list(AXES),
            "sources": [fp.source.name for fp in self.footprints],
            "footprints": [fp.to_json_dict() for fp in self.footprints],
            "normalized": {
                fp.source.name: list(vec)
                for fp, vec in zip(self.footprints, self.normalized)
            },
            "rankings": {axis: list(entries) for axis, entries in self.rankings.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ComparisonReport":
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise FootprintError(
                "TOO_FEW", f"unsupported comparison schema_version {obj.get('schema_version')!r}"
            )
        footprints = tuple(Footprint.from_json_dict(fp) for fp in obj["footprints"])
        normalized = tuple(
            tuple(float(x) for x in obj["normalized"][fp.source.name]) for fp in footprints
        )
        return cls(footprints=footprints, normalized=normalized, rankings=obj["rankings"])


def _rank_axis(footprints: Sequence[Footprint], axis: str) -> list[dict]:
    """Competition ranking, descending raw value; flagged entries rank last."""
    entries = []
    for fp in footprints:
        value = fp.metrics[axis]
        entries.append((fp.source.name, value))
    present = sorted(
        (e for e in entries if e[1] is not None), key=lambda t: (-float(t[1]), t[0])
    )
    ranking: list[dict] = []
    rank = 0
    prev_value: float | None = None
    for idx, (name, value) in enumerate(present, start=1):
        if prev_value is None or float(value) != prev_value:
            rank = idx
            prev_value = float(value)
        ranking.append({"source": name, "value": value, "rank": rank})
    values = [float(v) for _, v in present]
    tied = len(values) > 1 and all(v == values[0] for v in values)
    for name, value in sorted(e for e in entries if e[1] is None):
        ranking.append({"source": name, "value": None, "rank": None})
    if tied:
        for entry in ranking:
            if entry["rank"] is not None:
                entry["tied"] = True
    return ranking


def compare(footprints: Sequence[Footprint]) -> ComparisonReport:
    """Deterministic comparison of footprints: normalized vectors and
    per-axis rankings (a fully tied axis marks every entry TIED)."""
    normalized = normalize_for_radar(footprints)
    rankings = {axis: _rank_axis(footprints, axis) for axis in AXES}
    return ComparisonReport(
        footprints=tuple(footprints),
        normalized=tuple(tuple(v) for v in normalized),
        rankings=rankings,
    )


def radar_csv(report: ComparisonReport) -> str:
    """axis,source,raw,normalized rows; flagged slots leave raw empty."""
    lines = ["axis,source,raw,normalized"]
    for a_idx, axis in enumerate(AXES):
        for fp, vec in zip(report.footprints, report.normalized):
            raw = fp.metrics[axis]
            raw_s = "" if raw is None else repr(float(raw))
            lines.append(f"{axis},{fp.source.name},{raw_s},{repr(float(vec[a_idx]))}")
    return "\n".join(lines) + "\n"
