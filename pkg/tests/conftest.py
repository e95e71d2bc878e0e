import numpy as np
import pytest

from stqpcc.sampling import SeededRng


@pytest.fixture
def rng():
    return SeededRng(2024, 0)


def random_simplex_points(n, count, seed=0):
    return np.random.default_rng(seed).dirichlet(np.ones(n), count)


def random_symmetric(n, seed=0, scale=1.0):
    a = np.random.default_rng(seed).standard_normal((n, n)) * scale
    return (a + a.T) / 2


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
