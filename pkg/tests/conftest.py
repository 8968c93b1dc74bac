import numpy as np
import pytest

from sepplan.domains import domain_problem
from sepplan.instances import random_mdp, random_problem


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture(scope="session")
def cs():
    return domain_problem("cs", 1.0)


@pytest.fixture(scope="session")
def cl():
    return domain_problem("cl", 0.95)


@pytest.fixture(scope="session")
def wumpus():
    return domain_problem("wumpus", 0.9)


@pytest.fixture
def small_problems():
    """A fixed handful of 3-5 state random problems at assorted bounds."""
    rng = np.random.default_rng(11)
    out = []
    for i in range(12):
        S = 3 + i % 3
        out.append(random_problem(rng, S, 2 + i % 2, (0.8, 0.9, 0.95)[i % 3], 0.9, 0.95))
    return out


@pytest.fixture
def mdp5(rng):
    return random_mdp(rng, 5, 3, 0.9)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
