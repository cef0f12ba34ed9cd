import numpy as np
import pytest

from hyperring.biphoton import compute_jsa
from hyperring.experiments import system_grid
from hyperring.model import default_system


@pytest.fixture(scope="session")
def system():
    return default_system()


@pytest.fixture(scope="session")
def grid(system):
    return system_grid(system)


@pytest.fixture(scope="session")
def jsas(system, grid):
    return tuple(compute_jsa(r, p, grid) for r, p in zip(system.rings, system.pumps))


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
