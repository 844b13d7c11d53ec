"""Shared fixtures and the acceptance-criterion reporting hook."""

from __future__ import annotations

import numpy as np
import pytest

from fitscape.cellspace import CellSpec, Genotype, encode
from fitscape.sampling import lhs_sample

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(text): ties a test to one acceptance criterion"
    )


def pytest_runtest_makereport(item, call):
    if call.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    outcome = "PASS" if call.excinfo is None else "FAIL"
    _ACCEPTANCE_RESULTS.append((outcome, marker.args[0]))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, text in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{outcome}: {text}")


@pytest.fixture(scope="session")
def sample_cells_200() -> list[CellSpec]:
    return lhs_sample(200, 90125)


@pytest.fixture(scope="session")
def sample_genotypes_200(sample_cells_200) -> list[Genotype]:
    return [encode(c) for c in sample_cells_200]


def random_genotype(rng: np.random.Generator, max_bits: int = 12) -> Genotype:
    """Arbitrary (usually undecodable) genotype with a small popcount."""
    n_bits = int(rng.integers(0, max_bits + 1))
    indices = rng.choice(289, size=n_bits, replace=False)
    return Genotype.from_set_bits(int(b) for b in indices)
