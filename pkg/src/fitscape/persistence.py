"""Rank persistence across training budgets.

Persistence asks: of the models ranked in the top (or bottom) Nth
percentile at a reference budget, how many still hold that rank at a
larger budget? The area under the persistence curve over N in [1, n_max]
summarizes rank stability on a [0, 1] scale, where 1 means the percentile
sets never change.

The population for every rank set is the intersection population: models
holding a record at every budget under analysis, so set sizes stay
comparable across budgets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal

from .errors import PersistenceError
from .fitness import FitnessTable, SourceId

Direction = Literal["TOP", "BOTTOM"]

DEFAULT_N_MAX = 25.0
DEFAULT_REFERENCE_BUDGET = 4


@dataclass(frozen=True)
class RankSnapshot:
    """Membership of one percentile rank set at one budget."""

    source: str
    budget: int
    direction: Direction
    n_percent: float
    member_ids: frozenset[str]


@dataclass(frozen=True)
class PersistenceCurve:
    direction: Direction
    b_ref: int
    b: int
    points: tuple[tuple[float, float], ...]  # (n_percent, persistence_percent)


@dataclass(frozen=True)
class PersistenceSummary:
    """What the footprint consumes: the AuC plus persistence at n_max."""

    direction: Direction
    b_ref: int
    b: int
    auc: float
    p_at_nmax: float
    n_max: float


def _population(
    table: FitnessTable, source: str | SourceId, budgets: Iterable[int]
) -> list[str]:
    ids = table.model_ids(source, budgets)
    if not ids:
        raise PersistenceError(
            "EMPTY_POPULATION",
            f"no models evaluated at all budgets {sorted(set(budgets))} for {source}",
        )
    return sorted(ids)


def rank_set(
    table: FitnessTable,
    source: str | SourceId,
    budget: int,
    n_percent: float,
    direction: Direction,
    budgets: Iterable[int] | None = None,
) -> RankSnapshot:
    """The ceil(n% * population) best (TOP) or worst (BOTTOM) model ids.

    ``budgets`` fixes the analysis population (models present at all of
    them); it defaults to just ``budget``. Fitness ties break on ascending
    model id, so sets are deterministic.
    """
    if not (0.0 < n_percent <= 100.0):
        raise ValueError("n_percent must lie in (0, 100]")
    if direction not in ("TOP", "BOTTOM"):
        raise ValueError(f"unknown direction: {direction!r}")
    name = source.name if isinstance(source, SourceId) else source
    population = _population(table, name, budgets if budgets is not None else [budget])
    size = math.ceil(n_percent / 100.0 * len(population))
    sign = -1.0 if direction == "TOP" else 1.0
    ranked = sorted(
        population, key=lambda m: (sign * table.query(m, name, budget), m)
    )
    return RankSnapshot(
        source=name,
        budget=budget,
        direction=direction,
        n_percent=float(n_percent),
        member_ids=frozenset(ranked[:size]),
    )


def persistence(
    table: FitnessTable,
    source: str | SourceId,
    n_percent: float,
    b_ref: int,
    b: int,
    direction: Direction,
    budgets: Iterable[int] | None = None,
) -> float:
    """Percentage of the reference-budget rank set still ranked at budget b."""
    budgets = list(budgets) if budgets is not None else [b_ref, b]
    ref = rank_set(table, source, b_ref, n_percent, direction, budgets)
    cur = rank_set(table, source, b, n_percent, direction, budgets)
    return 100.0 * len(ref.member_ids & cur.member_ids) / len(ref.member_ids)


def persistence_curve(
    table: FitnessTable,
    source: str | SourceId,
    b_ref: int,
    b: int,
    direction: Direction,
    n_max: float = DEFAULT_N_MAX,
    budgets: Iterable[int] | None = None,
) -> PersistenceCurve:
    """Persistence sampled on the unit grid n = 1, 2, ..., n_max."""
    grid = _grid(n_max)
    points = tuple(
        (float(n), persistence(table, source, n, b_ref, b, direction, budgets))
        for n in grid
    )
    return PersistenceCurve(direction=direction, b_ref=b_ref, b=b, points=points)


def _grid(n_max: float) -> list[int]:
    if n_max < 1 or n_max > 100:
        raise ValueError("n_max must lie in [1, 100]")
    return list(range(1, int(math.floor(n_max)) + 1))


def persistence_auc(
    table: FitnessTable,
    source: str | SourceId,
    b_ref: int,
    b: int,
    direction: Direction,
    n_max: float = DEFAULT_N_MAX,
    budgets: Iterable[int] | None = None,
) -> float:
    """Normalized area under the persistence-fraction curve on [1, n_max].

    Trapezoidal integration over the unit grid divided by the grid span,
    i.e. the average persisted fraction: constant 100% persistence gives
    exactly 1.0 and constant 26% gives 0.26.
    """
    curve = persistence_curve(table, source, b_ref, b, direction, n_max, budgets)
    return auc_of_curve(curve)


def auc_of_curve(curve: PersistenceCurve) -> float:
    fractions = [p / 100.0 for _, p in curve.points]
    if len(fractions) == 1:
        return fractions[0]
    span = curve.points[-1][0] - curve.points[0][0]
    area = sum(
        (fractions[i] + fractions[i + 1]) / 2.0 for i in range(len(fractions) - 1)
    )
    return area / span


def summarize(
    table: FitnessTable,
    source: str | SourceId,
    b_ref: int,
    b: int,
    direction: Direction,
    n_max: float = DEFAULT_N_MAX,
    budgets: Iterable[int] | None = None,
) -> tuple[PersistenceCurve, PersistenceSummary]:
    """Curve plus the (auc, p at n_max) summary consumed by footprints."""
    curve = persistence_curve(table, source, b_ref, b, direction, n_max, budgets)
    summary = PersistenceSummary(
        direction=direction,
        b_ref=b_ref,
        b=b,
        auc=auc_of_curve(curve),
        p_at_nmax=curve.points[-1][1],
        n_max=float(n_max),
    )
    return curve, summary
