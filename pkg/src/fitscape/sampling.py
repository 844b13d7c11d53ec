"""Seeded sampling of cells and random walks over the Hamming neighborhood.

Cells are drawn through a 26-dimensional joint design: 21 boolean edge
dimensions (the upper-triangular pairs of a 7-node cell, lexicographic
(i, j) order) followed by 5 ternary operator dimensions (positions 1..5).
A drawn row is pruned to the subgraph lying on IN->OUT paths and compacted
to the canonical placement, mirroring how the underlying search space
treats unused nodes; rows with no IN->OUT path or more than 9 surviving
edges are invalid draws.

All routines are bitwise-reproducible: randomness comes from PCG64 streams
keyed by explicit seed material, and invalid LHS rows are re-drawn from a
sub-stream keyed by (seed, row, attempt) so repairs stay local.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

from .cellspace import (
    CellSpec,
    Genotype,
    OPS,
    decode,
    encode,
    hamming,
    neighbors,
    on_path_nodes,
    validate_cell,
)
from .errors import SamplingError
from .fitness import FitnessSource, SourceId

EDGE_PAIRS = tuple((i, j) for i in range(7) for j in range(i + 1, 7))  # 21 dims
N_EDGE_DIMS = len(EDGE_PAIRS)
N_OP_DIMS = 5
DIM_LEVELS = (2,) * N_EDGE_DIMS + (3,) * N_OP_DIMS
DIM_NAMES = tuple(f"edge_{i}_{j}" for i, j in EDGE_PAIRS) + tuple(
    f"op_{p}" for p in range(1, 6)
)

_STREAM_LHS = 0x4C4853  # stream tags keep the main streams disjoint
_STREAM_UNIFORM = 0x554E49
_STREAM_WALK = 0x57414C4B

T = TypeVar("T")


def cell_from_design_row(levels: Sequence[int]) -> CellSpec | None:
    """Build the canonical cell a design row denotes; None for invalid draws.

    Nodes off every IN->OUT path are pruned and the survivors compacted,
    keeping the operators of surviving intermediate positions. A row is
    invalid when no IN->OUT path exists or the pruned cell still breaks a
    cell invariant (more than 9 edges).
    """
    if len(levels) != N_EDGE_DIMS + N_OP_DIMS:
        raise ValueError(f"expected {N_EDGE_DIMS + N_OP_DIMS} levels")
    edges = [pair for pair, bit in zip(EDGE_PAIRS, levels) if bit]
    live = on_path_nodes(7, edges)
    if 0 not in live or 6 not in live:
        return None
    keep = sorted(live)
    index = {node: i for i, node in enumerate(keep)}
    n = len(keep)
    adjacency = [[False] * n for _ in range(n)]
    for i, j in edges:
        if i in live and j in live:
            adjacency[index[i]][index[j]] = True
    ops = tuple(OPS[levels[N_EDGE_DIMS + p - 1]] for p in keep if 1 <= p <= 5)
    cell = CellSpec(n, tuple(tuple(r) for r in adjacency), ops)
    if not validate_cell(cell).ok:
        return None
    return cell


def _uniform_row(rng: np.random.Generator) -> np.ndarray:
    row = np.empty(N_EDGE_DIMS + N_OP_DIMS, dtype=np.int64)
    row[:N_EDGE_DIMS] = rng.integers(0, 2, size=N_EDGE_DIMS)
    row[N_EDGE_DIMS:] = rng.integers(0, 3, size=N_OP_DIMS)
    return row


def lhs_design(n: int, seed: int) -> np.ndarray:
    """Pre-rejection stratified design: n rows over the 26 joint dimensions.

    Per dimension, a seeded permutation of the n strata is binned onto the
    dimension's levels with equal-width bins, so each boolean level appears
    floor(n/2) or ceil(n/2) times and each ternary level floor(n/3) or
    ceil(n/3) times.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, _STREAM_LHS])))
    design = np.empty((n, len(DIM_LEVELS)), dtype=np.int64)
    for d, levels in enumerate(DIM_LEVELS):
        strata = rng.permutation(n)
        design[:, d] = (strata * levels) // n
    return design


def lhs_sample_meta(n: int, seed: int) -> tuple[list[CellSpec], dict]:
    """LHS sampling with repair metadata (see :func:`lhs_sample`)."""
    design = lhs_design(n, seed)
    level_counts = {
        name: [int((design[:, d] == lvl).sum()) for lvl in range(DIM_LEVELS[d])]
        for d, name in enumerate(DIM_NAMES)
    }
    budget = 100 * n
    repair_attempts = 0
    repaired_rows = 0
    cells: list[CellSpec] = []
    seen: set[str] = set()
    for row in range(n):
        levels = design[row]
        attempt = 0
        while True:
            cell = cell_from_design_row(levels)
            if cell is not None:
                key = encode(cell).to_hex()
                if key not in seen:
                    seen.add(key)
                    cells.append(cell)
                    break
            attempt += 1
            repair_attempts += 1
            if repair_attempts > budget:
                raise SamplingError(
                    "EXHAUSTED",
                    f"{budget} repair attempts did not yield {n} distinct valid cells",
                )
            if attempt == 1:
                repaired_rows += 1
            sub = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([seed, row, attempt]))
            )
            levels = _uniform_row(sub)
    meta = {
        "method": "lhs",
        "n": n,
        "seed": seed,
        "repaired_rows": repaired_rows,
        "repair_attempts": repair_attempts,
        "pre_rejection_level_counts": level_counts,
    }
    return cells, meta


def lhs_sample(n: int, seed: int) -> list[CellSpec]:
    """n pairwise-distinct valid cells from a stratified (LHS) joint design."""
    cells, _ = lhs_sample_meta(n, seed)
    return cells


def uniform_sample(n: int, seed: int) -> list[CellSpec]:
    """n valid cells from independent uniform draws with rejection.

    Draws are i.i.d., so repeats of the same cell may occur; only invalid
    rows are rejected.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, _STREAM_UNIFORM])))
    cells: list[CellSpec] = []
    attempts = 0
    budget = 100 * n
    while len(cells) < n:
        attempts += 1
        if attempts > budget:
            raise SamplingError("EXHAUSTED", f"{budget} draws did not yield {n} valid cells")
        cell = cell_from_design_row(_uniform_row(rng))
        if cell is not None:
            cells.append(cell)
    return cells


@dataclass(frozen=True)
class WalkTrace:
    """A random walk: visited genotypes plus their fitness, start included."""

    steps: tuple[Genotype, ...]
    fitness: tuple[float, ...]
    seed: int
    source_id: SourceId
    budget: int

    def __post_init__(self) -> None:
        if len(self.steps) != len(self.fitness):
            raise ValueError("steps and fitness must align")
        if not all(np.isfinite(self.fitness)):
            raise ValueError("fitness values must be finite")
        for a, b in zip(self.steps, self.steps[1:]):
            if hamming(a, b) != 1:
                raise ValueError("consecutive steps must differ by exactly one bit")

    def __len__(self) -> int:
        return len(self.steps)

    def to_jsonl(self) -> str:
        """One JSON object per visited step: {"t", "genotype", "fitness"}."""
        import json

        lines = [
            json.dumps({"t": t, "genotype": g.to_hex(), "fitness": f}, sort_keys=True)
            for t, (g, f) in enumerate(zip(self.steps, self.fitness))
        ]
        return "\n".join(lines) + "\n"


def walk_states(
    start: T,
    n_steps: int,
    rng: np.random.Generator,
    neighbors_of: Callable[[T], Sequence[T]],
) -> list[T]:
    """Generic uniform-neighbor walk engine; also drives reduced test spaces."""
    states = [start]
    cur = start
    for _ in range(n_steps):
        nbrs = neighbors_of(cur)
        if not nbrs:
            raise SamplingError("STUCK", "state has no neighbors to walk to", state=cur)
        cur = nbrs[int(rng.integers(len(nbrs)))]
        states.append(cur)
    return states


def random_walk(
    start: Genotype,
    n_steps: int,
    seed: int,
    source: FitnessSource,
    budget: int,
) -> WalkTrace:
    """Walk n_steps uniform moves over the VALID Hamming-1 neighborhood.

    The trace records the fitness of every visited genotype including the
    start (length n_steps + 1). Revisits are allowed. A missing tabular
    value surfaces as EVAL_MISS carrying the offending genotype hex.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    decode(start)  # precondition: the start must be a real cell
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, _STREAM_WALK])))
    try:
        states = walk_states(start, n_steps, rng, lambda g: neighbors(g, "VALID"))
    except SamplingError as exc:
        if exc.code == "STUCK":
            state = exc.detail.get("state")
            stuck = state.to_hex() if isinstance(state, Genotype) else start.to_hex()
            raise SamplingError(
                "STUCK", f"genotype {stuck} has no valid neighbors", genotype=stuck
            ) from exc
        raise
    fitness = tuple(source.evaluate(g, budget) for g in states)
    return WalkTrace(
        steps=tuple(states),
        fitness=fitness,
        seed=seed,
        source_id=source.id,
        budget=budget,
    )
