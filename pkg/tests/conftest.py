import os

os.environ.setdefault("HFATOM_CHECKS", "1")

import math

import numpy as np
import pytest

from hfatom.grid import RadialGrid, sample


@pytest.fixture(scope="session")
def grid():
    return RadialGrid.log(1e-6, 60.0, 4000)


@pytest.fixture(scope="session")
def hydrogen(grid):
    return sample(grid, lambda r: np.exp(-2 * r) / math.pi, "density")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
