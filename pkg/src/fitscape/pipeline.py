"""Run orchestration: config parsing, per-landscape analysis, footprint
assembly, and cross-source comparison.

One run analyzes every declared source at every budget over a shared pool
of models. Synthetic sources (NK, ONES) evaluate a seeded LHS pool;
tabular sources bring their own evaluated models. All artifact files are
schema-versioned JSON/CSV written atomically, and every derived seed is a
pure function of (config seed, source, budget, role), so reruns are
byte-identical.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .cellspace import Genotype, decode, encode, neighbors
from .distfit import FAMILIES, FitResult, fit_mle, select_best
from .errors import ConfigError, EvalMiss, FitError, FitscapeError
from .fitness import (
    EvalRecord,
    FitnessSource,
    FitnessTable,
    NKSource,
    OnesSource,
    SourceId,
    TabularSource,
    load_table,
    write_table,
)
from .footprint import (
    ComparisonReport,
    Footprint,
    Labeled,
    build_footprint,
    compare,
    radar_csv,
)
from .io_utils import (
    atomic_write_text,
    format_float,
    read_json_artifact,
    write_csv_text,
    write_json_artifact,
)
from .metrics import (
    FitnessStats,
    LocalOptimaResult,
    RuggednessResult,
    fdc,
    fitness_stats,
    local_optima_sampled,
    moving_average,
    ruggedness_tau,
)
from .persistence import PersistenceSummary, summarize
from .sampling import WalkTrace, lhs_sample, lhs_sample_meta, random_walk, uniform_sample


@dataclass(frozen=True)
class SourceDecl:
    """One source entry of a run config."""

    name: str
    kind: str
    path: str | None = None  # TABULAR
    n: int = 289  # NK
    k: int = 2
    seed: int = 0
    budget_seed_stride: int = 0
    walk: bool = True

    def to_json_dict(self) -> dict:
        obj: dict = {"name": self.name, "kind": self.kind, "walk": self.walk}
        if self.kind == "TABULAR":
            obj["path"] = self.path
        if self.kind == "NK":
            obj.update(
                {"n": self.n, "k": self.k, "seed": self.seed,
                 "budget_seed_stride": self.budget_seed_stride}
            )
        return obj


@dataclass(frozen=True)
class RunConfig:
    """Deterministic description of one full analysis run."""

    seed: int
    budgets: tuple[int, ...]
    sources: tuple[SourceDecl, ...]
    samples: int = 100
    walk_steps: int = 100
    nmax: float = 25.0
    window: int = 5
    b_ref: int | None = None
    output_dir: str = "out"

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ConfigError("BAD_CONFIG", "seed must be nonnegative")
        if not self.budgets:
            raise ConfigError("BAD_CONFIG", "budgets must be nonempty")
        if any(b <= 0 for b in self.budgets):
            raise ConfigError("BAD_CONFIG", "budgets must be positive")
        names = [s.name for s in self.sources]
        if len(names) != len(set(names)):
            raise ConfigError("BAD_CONFIG", "source names must be unique")
        if not self.sources:
            raise ConfigError("BAD_CONFIG", "at least one source is required")
        if self.samples < 2:
            raise ConfigError("BAD_CONFIG", "samples must be >= 2")
        if self.walk_steps < 0:
            raise ConfigError("BAD_CONFIG", "walk_steps must be >= 0")
        if not (1 <= self.nmax <= 100):
            raise ConfigError("BAD_CONFIG", "nmax must lie in [1, 100]")
        if self.window < 1:
            raise ConfigError("BAD_CONFIG", "window must be >= 1")
        if self.b_ref is not None and self.b_ref not in self.budgets:
            raise ConfigError("BAD_CONFIG", "b_ref must be one of the budgets")

    @property
    def reference_budget(self) -> int:
        if self.b_ref is not None:
            return self.b_ref
        return 4 if 4 in self.budgets else min(self.budgets)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "seed": self.seed,
            "budgets": list(self.budgets),
            "sources": [s.to_json_dict() for s in self.sources],
            "samples": self.samples,
            "walk_steps": self.walk_steps,
            "nmax": self.nmax,
            "window": self.window,
            "b_ref": self.b_ref,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_json_dict(cls, obj: dict, base_dir: Path | None = None) -> "RunConfig":
        if obj.get("schema_version") != 1:
            raise ConfigError(
                "BAD_CONFIG", f"unsupported config schema_version {obj.get('schema_version')!r}"
            )
        sources = []
        for decl in obj.get("sources", []):
            kind = decl.get("kind")
            if kind not in ("TABULAR", "NK", "ONES"):
                raise ConfigError("BAD_CONFIG", f"unknown source kind {kind!r}")
            path = decl.get("path")
            if kind == "TABULAR":
                if not path:
                    raise ConfigError("BAD_CONFIG", f"source {decl.get('name')!r} needs a path")
                if base_dir is not None and not Path(path).is_absolute():
                    path = str(base_dir / path)
            sources.append(
                SourceDecl(
                    name=str(decl["name"]),
                    kind=kind,
                    path=path,
                    n=int(decl.get("n", 289)),
                    k=int(decl.get("k", 2)),
                    seed=int(decl.get("seed", 0)),
                    budget_seed_stride=int(decl.get("budget_seed_stride", 0)),
                    walk=bool(decl.get("walk", True)),
                )
            )
        return cls(
            seed=int(obj["seed"]),
            budgets=tuple(int(b) for b in obj["budgets"]),
            sources=tuple(sources),
            samples=int(obj.get("samples", 100)),
            walk_steps=int(obj.get("walk_steps", 100)),
            nmax=float(obj.get("nmax", 25)),
            window=int(obj.get("window", 5)),
            b_ref=None if obj.get("b_ref") is None else int(obj["b_ref"]),
            output_dir=str(obj.get("output_dir", "out")),
        )


def load_config(path: Path | str) -> RunConfig:
    path = Path(path)
    obj = read_json_artifact(path, required=("seed", "budgets", "sources"))
    return RunConfig.from_json_dict(obj, base_dir=path.parent)


def derived_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary labels (no process salt)."""
    text = ":".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def build_source(decl: SourceDecl, budgets: tuple[int, ...]) -> FitnessSource:
    if decl.kind == "NK":
        return NKSource(
            SourceId(decl.name, "NK"),
            n=decl.n,
            k=decl.k,
            seed=decl.seed,
            budget_seed_stride=decl.budget_seed_stride,
            budgets=budgets,
        )
    if decl.kind == "ONES":
        return OnesSource(SourceId(decl.name, "ONES"))
    if decl.kind == "TABULAR":
        table = load_table(decl.path)
        return TabularSource(table, SourceId(decl.name, "TABULAR"))
    raise ConfigError("BAD_CONFIG", f"unknown source kind {decl.kind!r}")


# ---------------------------------------------------------------------------
# Per-landscape analysis
# ---------------------------------------------------------------------------


@dataclass
class _Pool:
    """The evaluated model pool for one source: ids, genotypes, fitness table."""

    model_ids: list[str]
    genotypes: dict[str, Genotype]
    table: FitnessTable


def _synthetic_pool(
    config: RunConfig, source: FitnessSource, cells, decl: SourceDecl
) -> _Pool:
    genotypes = {f"m{idx:04d}": encode(cell) for idx, cell in enumerate(cells)}
    records = [
        EvalRecord(
            model_id=model_id,
            source=source.id,
            budget=budget,
            fitness_test=source.evaluate(g, budget),
            genotype=g,
        )
        for model_id, g in genotypes.items()
        for budget in config.budgets
    ]
    return _Pool(sorted(genotypes), genotypes, FitnessTable(records))


def _tabular_pool(config: RunConfig, source: TabularSource, decl: SourceDecl) -> _Pool:
    table = source.table
    ids = sorted(table.model_ids(decl.name, config.budgets))
    if not ids:
        raise EvalMiss(
            "EVAL_MISS",
            f"source {decl.name!r} has no models evaluated at all budgets {list(config.budgets)}",
        )
    genotypes: dict[str, Genotype] = {}
    for rec in table.records():
        if rec.source.name == decl.name and rec.model_id in ids and rec.genotype is not None:
            genotypes.setdefault(rec.model_id, rec.genotype)
    ungenotyped = [m for m in ids if m not in genotypes]
    if ungenotyped:
        raise ConfigError(
            "BAD_CONFIG",
            f"source {decl.name!r} models without genotypes: {ungenotyped[:5]}; "
            "analysis needs genotyped records",
        )
    records = [
        r for r in table.records()
        if r.source.name == decl.name and r.model_id in ids and r.budget in config.budgets
    ]
    return _Pool(ids, genotypes, FitnessTable(records))


def _walk_start(pool: _Pool) -> Genotype:
    """First pool genotype that can actually move (a valid neighbor exists)."""
    for model_id in pool.model_ids:
        g = pool.genotypes[model_id]
        if neighbors(g, "VALID"):
            return g
    raise FitscapeError("STUCK", "no pool genotype has a valid neighbor to start a walk")


def _analysis_id(kind: str, config: RunConfig, source: str, budget: int | None = None) -> str:
    tag = f"{kind}:{source}"
    if budget is not None:
        tag += f":b{budget}"
    return f"{tag}:seed{config.seed}"


def analyze_run(config: RunConfig, out_dir: Path | str) -> None:
    """Compute stats, distribution fits, FDC, ruggedness, local optima, and
    persistence for every (source, budget); write one artifact tree."""
    out = Path(out_dir)
    sources = {decl.name: build_source(decl, config.budgets) for decl in config.sources}

    cells = lhs_sample(config.samples, config.seed)
    write_json_artifact(out / "config_resolved.json", config.to_json_dict())

    for decl in config.sources:
        source = sources[decl.name]
        if isinstance(source, TabularSource):
            pool = _tabular_pool(config, source, decl)
        else:
            pool = _synthetic_pool(config, source, cells, decl)

        src_dir = out / decl.name
        src_dir.mkdir(parents=True, exist_ok=True)
        write_table(pool.table, src_dir / "evals.csv")

        for budget in config.budgets:
            _analyze_landscape(config, decl, source, pool, budget, src_dir / f"b{budget}")


def _analyze_landscape(
    config: RunConfig,
    decl: SourceDecl,
    source: FitnessSource,
    pool: _Pool,
    budget: int,
    dest: Path,
) -> None:
    name = decl.name
    records = pool.table.records_for(name, budget)
    values = [r.fitness_test for r in records]

    stats = fitness_stats(values)
    write_json_artifact(
        dest / "stats.json",
        {
            "analysis_id": _analysis_id("stats", config, name, budget),
            "source": name,
            "budget": budget,
            "mean": stats.mean,
            "std": stats.std,
            "variance": stats.std**2,
            "min": stats.min,
            "max": stats.max,
            "n": stats.n,
        },
    )

    _write_fits(config, name, budget, values, dest)
    _write_fdc(config, name, budget, records, dest)
    _write_walk(config, decl, source, pool, budget, dest)

    optima = local_optima_sampled(pool.table, name, budget)
    write_json_artifact(
        dest / "local_optima.json",
        {
            "analysis_id": _analysis_id("optima", config, name, budget),
            "source": name,
            "budget": budget,
            "count": optima.count,
            "ids": list(optima.ids),
            "estimate": optima.estimate,
        },
    )

    for direction, stem in (("TOP", "persistence_pos"), ("BOTTOM", "persistence_neg")):
        curve, summary = summarize(
            pool.table,
            name,
            config.reference_budget,
            budget,
            direction,  # type: ignore[arg-type]
            n_max=config.nmax,
            budgets=config.budgets,
        )
        write_csv_text(
            dest / f"{stem}.csv",
            "n_percent,persistence_percent",
            [f"{format_float(n)},{format_float(p)}" for n, p in curve.points],
        )
        write_json_artifact(
            dest / f"{stem}.json",
            {
                "analysis_id": _analysis_id(stem, config, name, budget),
                "source": name,
                "budget": budget,
                "direction": summary.direction,
                "b_ref": summary.b_ref,
                "b": summary.b,
                "auc": summary.auc,
                "p_at_nmax": summary.p_at_nmax,
                "n_max": summary.n_max,
            },
        )


def _write_fits(config: RunConfig, name: str, budget: int, values, dest: Path) -> None:
    clamped_below_zero = sum(1 for v in values if v < 0)
    fits: list[FitResult] = []
    fit_errors: dict[str, str] = {}
    for family in FAMILIES:
        try:
            fits.append(fit_mle(values, family))
        except FitError as exc:
            fit_errors[family] = exc.code
    best_family = None
    if fits:
        try:
            best_family = select_best(fits).family
        except FitError:
            best_family = None
    write_json_artifact(
        dest / "fits.json",
        {
            "analysis_id": _analysis_id("fits", config, name, budget),
            "source": name,
            "budget": budget,
            "n": len(values),
            "clamped_below_zero": clamped_below_zero,
            "fits": [f.to_json_dict() for f in fits],
            "fit_errors": fit_errors,
            "best_family": best_family,
        },
    )
    by_family = {f.family: f for f in fits}
    rows = []
    for metric, attr in (("likelihood", "loglik"), ("aic", "aic"), ("bic", "bic")):
        cells = [
            format_float(getattr(by_family[fam], attr)) if fam in by_family else ""
            for fam in FAMILIES
        ]
        rows.append(",".join([metric, *cells]))
    write_csv_text(dest / "fits_table.csv", "metric,beta,weibull,lognormal", rows)


def _write_fdc(config: RunConfig, name: str, budget: int, records, dest: Path) -> None:
    samples = [(r.genotype, r.fitness_test) for r in records]
    ids = [r.model_id for r in records]
    result = fdc(samples, ids=ids)
    write_csv_text(
        dest / "fdc.csv",
        "distance,fitness",
        [f"{d},{format_float(f)}" for d, f in result.points],
    )
    write_json_artifact(
        dest / "fdc_meta.json",
        {
            "analysis_id": _analysis_id("fdc", config, name, budget),
            "source": name,
            "budget": budget,
            "optimum_id": result.optimum_id,
            "pearson_r": result.pearson_r,
            "n_points": len(result.points),
        },
    )


def _write_walk(
    config: RunConfig,
    decl: SourceDecl,
    source: FitnessSource,
    pool: _Pool,
    budget: int,
    dest: Path,
) -> None:
    if not decl.walk:
        write_json_artifact(
            dest / "ruggedness.json",
            {
                "analysis_id": _analysis_id("rugged", config, decl.name, budget),
                "source": decl.name,
                "budget": budget,
                "rho1": None,
                "tau": None,
                "walk_len": None,
                "flag": "NO_WALK",
            },
        )
        return
    start = _walk_start(pool)
    walk_seed = derived_seed(config.seed, decl.name, budget, "walk")
    trace = random_walk(start, config.walk_steps, walk_seed, source, budget)
    atomic_write_text(dest / "walk.jsonl", trace.to_jsonl())
    if len(trace) >= config.window:
        smoothed = moving_average(trace.fitness, config.window)
        write_csv_text(
            dest / "walk_smoothed.csv",
            "t,fitness",
            [
                f"{t + config.window - 1},{format_float(v)}"
                for t, v in enumerate(smoothed)
            ],
        )
    rugged = ruggedness_tau(trace)
    write_json_artifact(
        dest / "ruggedness.json",
        {
            "analysis_id": _analysis_id("rugged", config, decl.name, budget),
            "source": decl.name,
            "budget": budget,
            "rho1": rugged.rho1,
            "tau": rugged.tau,
            "walk_len": rugged.walk_len,
            "flag": rugged.flag,
            "start": start.to_hex(),
            "walk_seed": walk_seed,
        },
    )


# ---------------------------------------------------------------------------
# Footprint assembly and comparison
# ---------------------------------------------------------------------------


def footprint_run(config: RunConfig, out_dir: Path | str) -> None:
    """Assemble footprint.json for every (source, budget) from the analyze
    artifacts under ``out_dir`` (run analyze first)."""
    out = Path(out_dir)
    for decl in config.sources:
        source_id = SourceId(decl.name, decl.kind)
        for budget in config.budgets:
            dest = out / decl.name / f"b{budget}"
            fp = _assemble_footprint(source_id, budget, dest)
            write_json_artifact(dest / "footprint.json", fp.to_json_dict())


def _assemble_footprint(source_id: SourceId, budget: int, dest: Path) -> Footprint:
    stats_obj = read_json_artifact(dest / "stats.json", required=("mean", "std", "n"))
    rugged_obj = read_json_artifact(dest / "ruggedness.json", required=("flag",))
    optima_obj = read_json_artifact(dest / "local_optima.json", required=("count",))
    pos_obj = read_json_artifact(dest / "persistence_pos.json", required=("auc", "p_at_nmax"))
    neg_obj = read_json_artifact(dest / "persistence_neg.json", required=("auc", "p_at_nmax"))

    def lab(obj: dict, value) -> Labeled:
        return Labeled(value, source_id, int(obj["budget"]), str(obj["analysis_id"]))

    stats = FitnessStats(
        mean=float(stats_obj["mean"]),
        std=float(stats_obj["std"]),
        min=float(stats_obj["min"]),
        max=float(stats_obj["max"]),
        n=int(stats_obj["n"]),
    )
    rugged: RuggednessResult | None = None
    if rugged_obj.get("rho1") is not None:
        rugged = RuggednessResult(
            rho1=float(rugged_obj["rho1"]),
            tau=None if rugged_obj.get("tau") is None else float(rugged_obj["tau"]),
            walk_len=int(rugged_obj["walk_len"]),
            flag=rugged_obj.get("flag"),
        )
    optima = LocalOptimaResult(
        count=int(optima_obj["count"]),
        ids=tuple(optima_obj.get("ids", ())),
        estimate=bool(optima_obj.get("estimate", False)),
    )

    def summary(obj: dict) -> PersistenceSummary:
        return PersistenceSummary(
            direction=obj["direction"],
            b_ref=int(obj["b_ref"]),
            b=int(obj["b"]),
            auc=float(obj["auc"]),
            p_at_nmax=float(obj["p_at_nmax"]),
            n_max=float(obj["n_max"]),
        )

    return build_footprint(
        lab(stats_obj, stats),
        lab(rugged_obj, rugged),
        lab(optima_obj, optima),
        lab(pos_obj, summary(pos_obj)),
        lab(neg_obj, summary(neg_obj)),
    )


def compare_footprints(paths: list[Path | str]) -> ComparisonReport:
    footprints = [
        Footprint.from_json_dict(read_json_artifact(p, required=("metrics", "source")))
        for p in paths
    ]
    return compare(footprints)


def write_comparison(report: ComparisonReport, out_json: Path | str, out_csv: Path | str) -> None:
    atomic_write_text(out_json, report.to_json())
    atomic_write_text(out_csv, radar_csv(report))


# ---------------------------------------------------------------------------
# Sampling / walking entry points used by the CLI
# ---------------------------------------------------------------------------


def sample_to_csv(n: int, seed: int, method: str, out_path: Path | str) -> None:
    if method == "lhs":
        cells, meta = lhs_sample_meta(n, seed)
    elif method == "uniform":
        cells = uniform_sample(n, seed)
        meta = {"method": "uniform", "n": n, "seed": seed}
    else:
        raise ConfigError("BAD_CONFIG", f"unknown sampling method {method!r}")
    rows = [f"m{idx:04d},{encode(cell).to_hex()}" for idx, cell in enumerate(cells)]
    write_csv_text(out_path, "model_id,genotype_hex", rows)
    write_json_artifact(Path(str(out_path) + ".meta.json"), meta)


def walk_to_jsonl(
    config: RunConfig,
    source_name: str,
    budget: int,
    steps: int,
    seed: int,
    start_hex: str | None,
    out_path: Path | str,
) -> WalkTrace:
    decl = next((d for d in config.sources if d.name == source_name), None)
    if decl is None:
        raise ConfigError("BAD_CONFIG", f"config declares no source named {source_name!r}")
    source = build_source(decl, config.budgets)
    if start_hex is not None:
        start = Genotype.from_hex(start_hex)
        decode(start)
    else:
        start = None
        for cell in lhs_sample(8, seed):
            g = encode(cell)
            if neighbors(g, "VALID"):
                start = g
                break
        if start is None:
            raise FitscapeError("STUCK", "no sampled start cell has a valid neighbor")
    trace = random_walk(start, steps, seed, source, budget)
    atomic_write_text(out_path, trace.to_jsonl())
    write_json_artifact(
        Path(str(out_path) + ".meta.json"),
        {
            "source": source_name,
            "budget": budget,
            "steps": steps,
            "seed": seed,
            "start": start.to_hex(),
        },
    )
    return trace
