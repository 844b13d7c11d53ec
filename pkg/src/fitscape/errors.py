"""Shared error types.

Every failure mode carries a stable machine-readable ``code`` so callers
(and the CLI exit-code mapping) can branch without parsing messages.
"""

from __future__ import annotations

from typing import Any


class FitscapeError(Exception):
    """Base class for all toolkit errors.

    ``code`` is a stable identifier; ``detail`` holds optional structured
    payload (offending genotype hex, line numbers, ...).
    """

    def __init__(self, code: str, message: str, **detail: Any):
        super().__init__(message)
        self.code = code
        self.detail = detail

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        base = super().__str__()
        return f"{self.code}: {base}"


class CellError(FitscapeError):
    """Invalid cell handed to an operation that requires a valid one."""


class GenotypeError(FitscapeError):
    """Malformed genotype value (bad hex, wrong length, bad padding)."""


class DecodeError(FitscapeError):
    """Genotype does not decode to a cell.

    Codes: SLOT_CONFLICT, NOT_A_DAG, INVALID_STRUCTURE.
    """


class SamplingError(FitscapeError):
    """Sampler or walk failure (EXHAUSTED, STUCK)."""


class EvalMiss(FitscapeError):
    """A fitness source has no value for the requested key."""


class TableError(FitscapeError):
    """Fitness table ingestion failure (PARSE_ERROR, DUPLICATE_KEY, BAD_GENOTYPE).

    ``detail["problems"]`` lists every offending row as
    ``{"code", "line", "column", "reason"}`` dicts.
    """


class MetricError(FitscapeError):
    """Landscape metric precondition failure."""


class FitError(FitscapeError):
    """Distribution fitting failure."""


class PersistenceError(FitscapeError):
    """Rank persistence precondition failure."""


class FootprintError(FitscapeError):
    """Footprint assembly or comparison failure."""


class ConfigError(FitscapeError):
    """Run configuration is malformed or references missing inputs."""
