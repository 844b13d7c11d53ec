"""Fitness landscape footprint toolkit for binary-encoded cell search spaces."""

__version__ = "0.1.0"

from .cellspace import (
    OPS,
    CellSpec,
    Genotype,
    ValidationReport,
    decode,
    encode,
    hamming,
    neighbors,
    validate_cell,
)
from .distfit import FitResult, eval_cdf, fit_mle, information_criteria, select_best
from .errors import FitscapeError
from .fitness import (
    EvalRecord,
    FitnessTable,
    NKConfig,
    NKSource,
    OnesSource,
    SourceId,
    TabularSource,
    cohen_kappa,
    load_table,
    nk_fitness,
    write_table,
)
from .footprint import Footprint, Labeled, build_footprint, compare, normalize_for_radar
from .metrics import (
    FDCResult,
    FitnessStats,
    RuggednessResult,
    fdc,
    fitness_stats,
    local_optima_exhaustive,
    local_optima_sampled,
    moving_average,
    rho1,
    ruggedness_tau,
)
from .persistence import persistence, persistence_auc, rank_set
from .pipeline import RunConfig, SourceDecl, load_config
from .sampling import WalkTrace, lhs_sample, random_walk, uniform_sample

__all__ = [
    "__version__",
    "OPS",
    "CellSpec",
    "Genotype",
    "ValidationReport",
    "decode",
    "encode",
    "hamming",
    "neighbors",
    "validate_cell",
    "FitResult",
    "eval_cdf",
    "fit_mle",
    "information_criteria",
    "select_best",
    "FitscapeError",
    "EvalRecord",
    "FitnessTable",
    "NKConfig",
    "NKSource",
    "OnesSource",
    "SourceId",
    "TabularSource",
    "cohen_kappa",
    "load_table",
    "nk_fitness",
    "write_table",
    "Footprint",
    "Labeled",
    "build_footprint",
    "compare",
    "normalize_for_radar",
    "FDCResult",
    "FitnessStats",
    "RuggednessResult",
    "fdc",
    "fitness_stats",
    "local_optima_exhaustive",
    "local_optima_sampled",
    "moving_average",
    "rho1",
    "ruggedness_tau",
    "persistence",
    "persistence_auc",
    "rank_set",
    "RunConfig",
    "SourceDecl",
    "load_config",
    "WalkTrace",
    "lhs_sample",
    "random_walk",
    "uniform_sample",
]
