"""Pluggable fitness sources: tabular evaluation records, synthetic NK
landscapes, a trivial ones-count oracle, and the confusion-matrix kappa
metric used to turn classifier outputs into fitness.

Sources are interchangeable: each exposes ``evaluate(genotype, budget)``
and an identity, so downstream analyses treat a CSV of measured models and
a synthetic landscape the same way. Sensor fusion is represented purely as
another source id; no arithmetic combines sources here.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .cellspace import GENOTYPE_BITS, Genotype, decodes
from .errors import EvalMiss, FitscapeError, TableError

SOURCE_KINDS = ("TABULAR", "NK", "ONES")

EVAL_CSV_HEADER = ("model_id", "genotype_hex", "source", "budget_epochs", "fitness_test", "fitness_val")

# NASBench-style convention only; any positive integer budget is accepted.
DEFAULT_BUDGETS = (4, 12, 36, 108)


@dataclass(frozen=True, slots=True)
class SourceId:
    """Identity of a fitness provider. Fused tabular sources record their
    constituents in the name (e.g. "s1+s2") but are otherwise plain sources."""

    name: str
    kind: str = "TABULAR"

    def __post_init__(self) -> None:
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind: {self.kind!r}")
        if not self.name:
            raise ValueError("source name must be nonempty")


class FitnessSource(Protocol):
    """Anything that can price a genotype at a training budget."""

    @property
    def id(self) -> SourceId: ...

    def evaluate(self, genotype: Genotype, budget: int) -> float: ...


# ---------------------------------------------------------------------------
# Cohen's kappa
# ---------------------------------------------------------------------------


def cohen_kappa(confusion: Sequence[Sequence[int]]) -> float:
    """Cohen's kappa of a CxC confusion matrix of nonnegative counts.

    kappa = (p_o - p_e) / (1 - p_e), p_o = trace/total,
    p_e = sum_c row_c * col_c / total^2. Raises DEGENERATE when p_e = 1
    (a single nonempty class on both axes leaves chance agreement total).
    """
    m = np.asarray(confusion)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
        raise FitscapeError("DEGENERATE", "confusion matrix must be CxC with C >= 2")
    if not np.issubdtype(m.dtype, np.integer):
        raise FitscapeError("DEGENERATE", "confusion matrix must hold integer counts")
    if (m < 0).any():
        raise FitscapeError("DEGENERATE", "confusion matrix counts must be nonnegative")
    total = int(m.sum())
    if total <= 0:
        raise FitscapeError("DEGENERATE", "confusion matrix total must be positive")
    p_o = float(np.trace(m)) / total
    p_e = float(m.sum(axis=1) @ m.sum(axis=0)) / (total * total)
    if p_e == 1.0:
        raise FitscapeError("DEGENERATE", "chance agreement is 1 (single class on both axes)")
    return (p_o - p_e) / (1.0 - p_e)


# ---------------------------------------------------------------------------
# NK landscape oracle
# ---------------------------------------------------------------------------

_M64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def _splitmix64_np(x: np.ndarray) -> np.ndarray:
    # Same arithmetic as _splitmix64, vectorized over uint64 (wraps mod 2^64).
    with np.errstate(over="ignore"):
        x = x + np.uint64(0x9E3779B97F4A7C15)
        z = x
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class NKConfig:
    """Synthetic NK landscape over n-bit strings, adjacent (circular) scheme.

    Component i reads bits i..i+k (mod n) as a little-endian pattern; its
    contribution is a uniform [0, 1) value derived from (seed, i, pattern)
    by chained splitmix64 hashing, so evaluation is bit-identical across
    processes and platforms. Fitness is the mean of the n contributions.
    """

    n: int
    k: int
    seed: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be positive")
        if not (0 <= self.k < self.n):
            raise ValueError("k must satisfy 0 <= k < n")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def component_base(self, i: int) -> int:
        return _nk_bases(self.seed, self.n)[i]

    def component_value(self, i: int, pattern: int) -> float:
        return _splitmix64(self.component_base(i) ^ pattern) / 2.0**64


def _as_bitstring_int(x, n: int) -> int:
    if isinstance(x, int):
        if not (0 <= x < 1 << n):
            raise FitscapeError("LENGTH_MISMATCH", f"integer does not fit in {n} bits")
        return x
    bits = list(x)
    if len(bits) != n:
        raise FitscapeError("LENGTH_MISMATCH", f"expected {n} bits, got {len(bits)}")
    word = 0
    for t, b in enumerate(bits):
        if b not in (0, 1, "0", "1", False, True):
            raise FitscapeError("LENGTH_MISMATCH", f"bad bit value: {b!r}")
        if b in (1, "1", True):
            word |= 1 << t
    return word


@lru_cache(maxsize=64)
def _nk_bases(seed: int, n: int) -> tuple[int, ...]:
    base = _splitmix64(seed)
    return tuple(_splitmix64(base ^ i) for i in range(n))


def nk_fitness(cfg: NKConfig, x) -> float:
    """Fitness of one bitstring (int with bit t = position t, or a 0/1 sequence)."""
    word = _as_bitstring_int(x, cfg.n)
    n, k = cfg.n, cfg.k
    mask = (1 << (k + 1)) - 1
    # Duplicate the word so circular windows read without wraparound logic.
    doubled = word | (word << n)
    bases = _nk_bases(cfg.seed, n)
    total = 0.0
    for i in range(n):
        pattern = (doubled >> i) & mask
        total += _splitmix64(bases[i] ^ pattern) / 2.0**64
    return total / n


def nk_enumerate(cfg: NKConfig) -> np.ndarray:
    """Fitness of every bitstring 0..2^n-1, vectorized; index = bitstring int."""
    if cfg.n > 24:
        raise FitscapeError("SPACE_TOO_LARGE", f"2^{cfg.n} states is too many to enumerate")
    n, k = cfg.n, cfg.k
    states = np.arange(1 << n, dtype=np.uint64)
    total = np.zeros(1 << n, dtype=np.float64)
    bases = _nk_bases(cfg.seed, n)
    for i in range(n):
        pattern = np.zeros(1 << n, dtype=np.uint64)
        for t in range(k + 1):
            pattern |= ((states >> np.uint64((i + t) % n)) & np.uint64(1)) << np.uint64(t)
        total += _splitmix64_np(np.uint64(bases[i]) ^ pattern).astype(np.float64) / 2.0**64
    return total / n


# ---------------------------------------------------------------------------
# Tabular fitness
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class EvalRecord:
    """One measurement: (model, source, budget) -> test fitness.

    ``fitness_test`` is kappa in [-1, 1] or accuracy in [0, 1]; which metric
    a table holds is run metadata, not part of the schema.
    """

    model_id: str
    source: SourceId
    budget: int
    fitness_test: float
    genotype: Genotype | None = None
    fitness_val: float | None = None


class FitnessTable:
    """Immutable-after-load store of EvalRecords with key and genotype lookups."""

    def __init__(self, records: Iterable[EvalRecord]):
        self._records: list[EvalRecord] = []
        self._by_key: dict[tuple[str, str, int], EvalRecord] = {}
        self._model_by_genotype: dict[tuple[str, str], str] = {}
        for rec in records:
            self._add(rec)

    def _add(self, rec: EvalRecord) -> None:
        key = (rec.model_id, rec.source.name, rec.budget)
        if key in self._by_key:
            raise TableError("DUPLICATE_KEY", f"duplicate record for {key}")
        if rec.genotype is not None:
            gkey = (rec.genotype.to_hex(), rec.source.name)
            owner = self._model_by_genotype.setdefault(gkey, rec.model_id)
            if owner != rec.model_id:
                raise TableError(
                    "DUPLICATE_KEY",
                    f"genotype {gkey[0][:12]}... maps to both {owner} and {rec.model_id}",
                )
        self._by_key[key] = rec
        self._records.append(rec)

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> tuple[EvalRecord, ...]:
        return tuple(self._records)

    def sources(self) -> tuple[SourceId, ...]:
        seen: dict[str, SourceId] = {}
        for rec in self._records:
            seen.setdefault(rec.source.name, rec.source)
        return tuple(seen[name] for name in sorted(seen))

    def budgets(self, source: str | SourceId | None = None) -> tuple[int, ...]:
        name = source.name if isinstance(source, SourceId) else source
        return tuple(
            sorted({r.budget for r in self._records if name is None or r.source.name == name})
        )

    def per_source_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for rec in self._records:
            counts[rec.source.name] = counts.get(rec.source.name, 0) + 1
        return counts

    def records_for(self, source: str | SourceId, budget: int) -> list[EvalRecord]:
        name = source.name if isinstance(source, SourceId) else source
        return [r for r in self._records if r.source.name == name and r.budget == budget]

    def model_ids(self, source: str | SourceId, budgets: Iterable[int]) -> set[str]:
        """Models holding a record at every listed budget for the source."""
        name = source.name if isinstance(source, SourceId) else source
        budgets = list(budgets)
        if not budgets:
            return set()
        sets = []
        for b in budgets:
            sets.append({r.model_id for r in self._records if r.source.name == name and r.budget == b})
        out = sets[0]
        for s in sets[1:]:
            out &= s
        return out

    def query(self, key, source: str | SourceId, budget: int) -> float:
        """Stored test fitness for a model id or genotype; EVAL_MISS otherwise."""
        name = source.name if isinstance(source, SourceId) else source
        if isinstance(key, Genotype):
            model = self._model_by_genotype.get((key.to_hex(), name))
            if model is None:
                raise EvalMiss(
                    "EVAL_MISS",
                    f"no record for genotype {key.to_hex()} in source {name}",
                    genotype=key.to_hex(),
                    source=name,
                    budget=budget,
                )
            key = model
        rec = self._by_key.get((key, name, budget))
        if rec is None:
            raise EvalMiss(
                "EVAL_MISS",
                f"no record for ({key}, {name}, {budget})",
                model_id=key,
                source=name,
                budget=budget,
            )
        return rec.fitness_test


def query(table: FitnessTable, key, source: str | SourceId, budget: int) -> float:
    return table.query(key, source, budget)


def _parse_float(text: str, what: str) -> float:
    value = float(text)
    if not np.isfinite(value):
        raise ValueError(f"{what} must be finite")
    return value


def load_table(path) -> FitnessTable:
    """Ingest an eval CSV (schema: model_id,genotype_hex,source,budget_epochs,
    fitness_test,fitness_val). All malformed rows are collected and reported
    together with their line numbers; duplicates report both lines involved.
    """
    if not Path(path).is_file():
        raise TableError("PARSE_ERROR", f"input file not found: {path}", problems=[])

    problems: list[dict] = []
    records: list[EvalRecord] = []
    seen_lines: dict[tuple[str, str, int], int] = {}
    model_genotype: dict[str, str] = {}

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TableError("PARSE_ERROR", f"{path}: empty file", problems=[])
        if tuple(h.strip() for h in header) != EVAL_CSV_HEADER:
            raise TableError(
                "PARSE_ERROR",
                f"{path}: header must be {','.join(EVAL_CSV_HEADER)}",
                problems=[{"code": "PARSE_ERROR", "line": 1, "column": None, "reason": "bad header"}],
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(EVAL_CSV_HEADER):
                problems.append(
                    {"code": "PARSE_ERROR", "line": line_no, "column": None,
                     "reason": f"expected {len(EVAL_CSV_HEADER)} fields, got {len(row)}"}
                )
                continue
            model_id, genotype_hex, source_name, budget_s, fit_test_s, fit_val_s = (
                f.strip() for f in row
            )
            try:
                if not model_id:
                    raise ValueError("model_id must be nonempty")
                try:
                    budget = int(budget_s)
                except ValueError:
                    raise ValueError(f"budget_epochs not an integer: {budget_s!r}")
                if budget <= 0:
                    raise ValueError("budget_epochs must be positive")
                fitness_test = _parse_float(fit_test_s, "fitness_test")
                if not (-1.0 <= fitness_test <= 1.0):
                    raise ValueError("fitness_test outside [-1, 1]")
                fitness_val = _parse_float(fit_val_s, "fitness_val") if fit_val_s else None
            except ValueError as exc:
                problems.append(
                    {"code": "PARSE_ERROR", "line": line_no, "column": None, "reason": str(exc)}
                )
                continue

            genotype = None
            if genotype_hex:
                try:
                    genotype = Genotype.from_hex(genotype_hex)
                except FitscapeError as exc:
                    problems.append(
                        {"code": "BAD_GENOTYPE", "line": line_no, "column": 2, "reason": str(exc)}
                    )
                    continue
                if not decodes(genotype):
                    problems.append(
                        {"code": "BAD_GENOTYPE", "line": line_no, "column": 2,
                         "reason": "genotype does not decode"}
                    )
                    continue
                prior = model_genotype.setdefault(model_id, genotype_hex)
                if prior != genotype_hex:
                    problems.append(
                        {"code": "PARSE_ERROR", "line": line_no, "column": 2,
                         "reason": f"model {model_id} already bound to a different genotype"}
                    )
                    continue

            key = (model_id, source_name, budget)
            if key in seen_lines:
                problems.append(
                    {"code": "DUPLICATE_KEY", "line": line_no, "column": None,
                     "reason": f"key {key} already defined at line {seen_lines[key]}",
                     "first_line": seen_lines[key]}
                )
                continue
            seen_lines[key] = line_no
            records.append(
                EvalRecord(
                    model_id=model_id,
                    source=SourceId(source_name, "TABULAR"),
                    budget=budget,
                    fitness_test=fitness_test,
                    genotype=genotype,
                    fitness_val=fitness_val,
                )
            )

    if problems:
        worst = "DUPLICATE_KEY" if any(p["code"] == "DUPLICATE_KEY" for p in problems) else (
            "BAD_GENOTYPE" if any(p["code"] == "BAD_GENOTYPE" for p in problems) else "PARSE_ERROR"
        )
        lines = ", ".join(str(p["line"]) for p in problems[:10])
        raise TableError(worst, f"{path}: {len(problems)} bad row(s) at line(s) {lines}", problems=problems)
    return FitnessTable(records)


def _format_float(x: float) -> str:
    return repr(float(x))


def write_table(table: FitnessTable, path) -> None:
    """Emit the canonical CSV form: header, rows sorted by
    (model_id, source, budget), repr floats, UTF-8, LF newlines."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EVAL_CSV_HEADER)
    for rec in sorted(table.records(), key=lambda r: (r.model_id, r.source.name, r.budget)):
        writer.writerow(
            [
                rec.model_id,
                rec.genotype.to_hex() if rec.genotype is not None else "",
                rec.source.name,
                str(rec.budget),
                _format_float(rec.fitness_test),
                _format_float(rec.fitness_val) if rec.fitness_val is not None else "",
            ]
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


# ---------------------------------------------------------------------------
# Source implementations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TabularSource:
    """Fitness looked up from a table by genotype (or model id via the table)."""

    table: FitnessTable
    source_id: SourceId

    @property
    def id(self) -> SourceId:
        return self.source_id

    def evaluate(self, genotype: Genotype, budget: int) -> float:
        return self.table.query(genotype, self.source_id, budget)


@dataclass(frozen=True)
class NKSource:
    """NK landscape over the 289 genotype bits.

    The budget does not enter the NK definition; ``budget_seed_stride``
    optionally shifts the component seed per budget so different budgets
    expose genuinely different landscapes (stride 0 keeps them identical).
    """

    source_id: SourceId
    n: int = GENOTYPE_BITS
    k: int = 2
    seed: int = 0
    budget_seed_stride: int = 0
    budgets: tuple[int, ...] = DEFAULT_BUDGETS

    @property
    def id(self) -> SourceId:
        return self.source_id

    def config_for(self, budget: int) -> NKConfig:
        offset = 0
        if self.budget_seed_stride:
            try:
                offset = self.budget_seed_stride * self.budgets.index(budget)
            except ValueError:
                offset = self.budget_seed_stride * budget
        return NKConfig(n=self.n, k=self.k, seed=self.seed + offset)

    def evaluate(self, genotype: Genotype, budget: int) -> float:
        return nk_fitness(self.config_for(budget), genotype.as_int_lsb0())


@dataclass(frozen=True)
class OnesSource:
    """Fitness = fraction of set genotype bits; handy as a smooth reference."""

    source_id: SourceId

    @property
    def id(self) -> SourceId:
        return self.source_id

    def evaluate(self, genotype: Genotype, budget: int) -> float:
        return genotype.popcount / GENOTYPE_BITS
