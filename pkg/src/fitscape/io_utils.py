"""Deterministic, atomic artifact I/O.

Every JSON artifact carries ``schema_version`` and is validated on read;
files are written to a temporary sibling and renamed into place so a
failing run never leaves torn outputs behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .errors import ConfigError

SCHEMA_VERSION = 1


def dump_json(obj: dict) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def atomic_write_text(path: Path | str, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json_artifact(path: Path | str, obj: dict) -> None:
    obj = dict(obj)
    obj.setdefault("schema_version", SCHEMA_VERSION)
    atomic_write_text(path, dump_json(obj))


def read_json_artifact(path: Path | str, required: tuple[str, ...] = ()) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("MISSING_INPUT", f"input file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("PARSE_ERROR", f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ConfigError("PARSE_ERROR", f"{path}: expected a JSON object")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(
            "PARSE_ERROR",
            f"{path}: unsupported schema_version {obj.get('schema_version')!r}",
        )
    missing = [key for key in required if key not in obj]
    if missing:
        raise ConfigError("PARSE_ERROR", f"{path}: missing field(s) {', '.join(missing)}")
    return obj


def write_csv_text(path: Path | str, header: str, rows: list[str]) -> None:
    atomic_write_text(path, "\n".join([header, *rows]) + "\n" if rows else header + "\n")


def format_float(x: float) -> str:
    return repr(float(x))
