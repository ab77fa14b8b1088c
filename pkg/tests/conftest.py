import numpy as np
import pytest

from spglab.core import Condition, make_linear_schedule


@pytest.fixture(scope="session")
def schedule():
    return make_linear_schedule(50, 1e-4, 0.02)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def cond():
    return Condition.label(1)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
