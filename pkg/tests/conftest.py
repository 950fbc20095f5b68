from functools import lru_cache

import numpy as np
import pytest

from relu_landscape.families import FamilyId
from relu_landscape.solver import solve_family
from relu_landscape.symmetry import embed


@lru_cache(maxsize=None)
def solved(label, d):
    return solve_family(FamilyId.parse(label), d)


def solved_matrix(label, d):
    return embed(solved(label, d)).W


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
