import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nbody_regularity import closure, make_subspace, nbody_coulomb  # noqa: E402

_criteria: dict[str, list] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def chain_lattice():
    return closure(2, [make_subspace(2, [[1.0, 0.0]], name="Y")])


@pytest.fixture(scope="session")
def r3_lattice():
    return closure(3, [make_subspace(3, [[1, 0, 0]], name="A"), make_subspace(3, [[0, 1, 0], [0, 0, 1]], name="B")])


@pytest.fixture(scope="session")
def r6_lattice():
    return nbody_coulomb(2)[0]


def pytest_runtest_logreport(report):
    label = dict(report.user_properties).get("criterion")
    if label is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria.setdefault(label, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria):
        ok = all(o == "passed" for o in _criteria[label])
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
