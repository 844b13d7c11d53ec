"""Core landscape statistics: fitness distributions, fitness-distance
correlation, walk autocorrelation and ruggedness, moving averages, and
local-optima enumeration.

Maximization is the global convention (fitness is a test accuracy or
kappa), and plateaus count: a point ties with a neighbor, it still counts
as a local optimum, which keeps difficulty estimates conservative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np

from .cellspace import GENOTYPE_BITS, Genotype, hamming
from .errors import MetricError
from .fitness import FitnessTable, NKConfig, SourceId, nk_enumerate


@dataclass(frozen=True, slots=True)
class FitnessStats:
    """Population moments (std uses divisor n) plus range and count."""

    mean: float
    std: float
    min: float
    max: float
    n: int


def fitness_stats(values: Sequence[float]) -> FitnessStats:
    if len(values) == 0:
        raise MetricError("EMPTY", "no fitness values")
    arr = np.asarray(values, dtype=np.float64)
    return FitnessStats(
        mean=float(arr.mean()),
        std=float(arr.std()),  # population form, ddof=0
        min=float(arr.min()),
        max=float(arr.max()),
        n=int(arr.size),
    )


# ---------------------------------------------------------------------------
# Fitness distance correlation
# ---------------------------------------------------------------------------


def _generic_hamming(a, b) -> int:
    if isinstance(a, Genotype) and isinstance(b, Genotype):
        return hamming(a, b)
    if isinstance(a, int) and isinstance(b, int):
        return (a ^ b).bit_count()
    sa, sb = list(a), list(b)
    if len(sa) != len(sb):
        raise MetricError("EMPTY", "bitstrings of unequal length")
    return sum(1 for x, y in zip(sa, sb) if bool(int(x)) != bool(int(y)))


def _canonical_key(g) -> str:
    if isinstance(g, Genotype):
        return g.to_hex()
    if isinstance(g, int):
        return format(g, "016x")
    return "".join("1" if bool(int(x)) else "0" for x in g)


@dataclass(frozen=True)
class FDCResult:
    """Multiset of (distance to the sampled optimum, fitness) pairs.

    ``pearson_r`` is None when either variable is constant over the points.
    The optimum is the best *sampled* solution; with an unknowable global
    optimum this is the only defensible reference, and ``optimum_id``
    records which one was used.
    """

    points: tuple[tuple[int, float], ...]
    optimum_id: str
    pearson_r: float | None


def fdc(
    samples: Sequence[tuple[object, float]],
    ids: Sequence[str] | None = None,
    distance: Callable[[object, object], int] | None = None,
) -> FDCResult:
    """FDC over (genotype, fitness) samples in the raw Hamming space.

    The optimum is the maximum-fitness sample, ties broken by
    lexicographically smallest genotype hex; every other sample becomes a
    point. Samples sharing the optimum genotype are excluded along with it
    (they would contribute distance-0 points).
    """
    if len(samples) < 2:
        raise MetricError("EMPTY", "need at least two samples")
    if ids is not None and len(ids) != len(samples):
        raise MetricError("EMPTY", "ids must align with samples")
    dist = distance or _generic_hamming

    keys = [_canonical_key(g) for g, _ in samples]
    best = min(range(len(samples)), key=lambda i: (-samples[i][1], keys[i]))
    opt_g, _ = samples[best]
    opt_key = keys[best]

    points = [
        (int(dist(opt_g, g)), float(f))
        for (g, f), key in zip(samples, keys)
        if key != opt_key
    ]
    if not points:
        raise MetricError("EMPTY", "all samples share the optimum genotype")

    d = np.array([p[0] for p in points], dtype=np.float64)
    f = np.array([p[1] for p in points], dtype=np.float64)
    if d.std() == 0.0 or f.std() == 0.0:
        r: float | None = None
    else:
        r = float(np.corrcoef(d, f)[0, 1])
    return FDCResult(
        points=tuple(points),
        optimum_id=ids[best] if ids is not None else opt_key,
        pearson_r=r,
    )


# ---------------------------------------------------------------------------
# Ruggedness
# ---------------------------------------------------------------------------


def rho1(series: Sequence[float]) -> float:
    """Lag-1 autocorrelation, biased (divisor-n) covariance form."""
    arr = np.asarray(series, dtype=np.float64)
    if arr.size < 3:
        raise MetricError("TOO_SHORT", f"need at least 3 values, got {arr.size}")
    centered = arr - arr.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise MetricError("ZERO_VARIANCE", "series is constant")
    return float(centered[:-1] @ centered[1:]) / denom


NONPOSITIVE_RHO1 = "NONPOSITIVE_RHO1"


@dataclass(frozen=True, slots=True)
class RuggednessResult:
    """tau = 1/rho(1) when rho(1) > 0, else the NONPOSITIVE_RHO1 flag.

    Note the sign convention: high rho(1) (smooth walks) gives tau close
    to 1. rho1 is always reported so either reading of tau can be applied.
    """

    rho1: float
    tau: float | None
    walk_len: int
    flag: str | None = None


def ruggedness_tau(walk) -> RuggednessResult:
    """Ruggedness of a walk (a WalkTrace or any fitness sequence)."""
    series = getattr(walk, "fitness", walk)
    r = rho1(series)
    if r > 0:
        return RuggednessResult(rho1=r, tau=1.0 / r, walk_len=len(series))
    return RuggednessResult(rho1=r, tau=None, walk_len=len(series), flag=NONPOSITIVE_RHO1)


def moving_average(series: Sequence[float], window: int = 5) -> list[float]:
    """Valid-mode moving average; output length is n - window + 1."""
    arr = np.asarray(series, dtype=np.float64)
    if window < 1:
        raise MetricError("WINDOW_TOO_LARGE", "window must be >= 1")
    if window > arr.size:
        raise MetricError(
            "WINDOW_TOO_LARGE", f"window {window} exceeds series length {arr.size}"
        )
    kernel = np.full(window, 1.0 / window)
    return [float(x) for x in np.convolve(arr, kernel, mode="valid")]


# ---------------------------------------------------------------------------
# Local optima
# ---------------------------------------------------------------------------

MAX_EXHAUSTIVE_BITS = 20


@dataclass(frozen=True)
class LocalOptimaResult:
    """Count and identifiers of local maxima (plateaus included via >=).

    ``estimate`` marks the sampled mode, where only evaluated neighbors
    could be checked.
    """

    count: int
    ids: tuple[Hashable, ...]
    estimate: bool


def local_optima_exhaustive(cfg: NKConfig) -> LocalOptimaResult:
    """Enumerate every bitstring of an NK landscape; exact optima count."""
    if cfg.n > MAX_EXHAUSTIVE_BITS:
        raise MetricError(
            "SPACE_TOO_LARGE", f"n={cfg.n} exceeds exhaustive limit {MAX_EXHAUSTIVE_BITS}"
        )
    f = nk_enumerate(cfg)
    idx = np.arange(1 << cfg.n)
    is_opt = np.ones(1 << cfg.n, dtype=bool)
    for b in range(cfg.n):
        is_opt &= f >= f[idx ^ (1 << b)]
    ids = tuple(int(i) for i in np.nonzero(is_opt)[0])
    return LocalOptimaResult(count=len(ids), ids=ids, estimate=False)


def local_optima_sampled(
    table: FitnessTable, source: str | SourceId, budget: int
) -> LocalOptimaResult:
    """Empirical local optima among a table's evaluated genotypes.

    A record is an empirical optimum when no evaluated genotype at raw
    Hamming distance 1 beats it; absent neighbors are ignored, so the
    result is an estimate (upper-bound flavored) and flagged as such.
    """
    records = table.records_for(source, budget)
    if not records:
        raise MetricError("EMPTY", f"no records for ({source}, {budget})")
    by_word: dict[int, float] = {}
    for rec in records:
        if rec.genotype is None:
            raise MetricError("EMPTY", f"record {rec.model_id} has no genotype")
        by_word[rec.genotype.word] = rec.fitness_test
    ids = []
    for rec in records:
        g = rec.genotype
        f = rec.fitness_test
        dominated = False
        for b in range(GENOTYPE_BITS):
            other = by_word.get(g.flip(b).word)
            if other is not None and other > f:
                dominated = True
                break
        if not dominated:
            ids.append(rec.model_id)
    return LocalOptimaResult(count=len(ids), ids=tuple(ids), estimate=True)
