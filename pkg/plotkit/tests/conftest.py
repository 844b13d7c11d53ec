"""Builds a demo artifact tree by driving the primary toolkit's CLI.

plotkit only consumes documented file formats, so the fixture produces
them the same way a user would: through `python -m fitscape`.
"""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

DEMO_CONFIG = {
    "schema_version": 1,
    "seed": 404,
    "budgets": [4, 36],
    "b_ref": 4,
    "samples": 40,
    "walk_steps": 60,
    "nmax": 25,
    "window": 5,
    "output_dir": "out",
    "sources": [
        {"name": "nk_a", "kind": "NK", "n": 289, "k": 1, "seed": 21},
        {"name": "nk_b", "kind": "NK", "n": 289, "k": 7, "seed": 22, "budget_seed_stride": 1},
        {"name": "ones", "kind": "ONES"},
    ],
}


def run_fitscape(*argv: str) -> None:
    subprocess.run([sys.executable, "-m", "fitscape", *argv], check=True)


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("artifacts")
    config = root / "config.json"
    config.write_text(json.dumps(DEMO_CONFIG), encoding="utf-8")
    out = root / "out"
    run_fitscape("analyze", "--config", str(config), "--out", str(out))
    run_fitscape("footprint", "--config", str(config), "--out", str(out))
    footprints = sorted(str(p) for p in out.glob("*/b36/footprint.json"))
    run_fitscape(
        "compare", *footprints,
        "--out-json", str(out / "comparison.json"),
        "--out-csv", str(out / "radar.csv"),
    )
    return out
