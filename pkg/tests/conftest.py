import numpy as np
import pytest

from monocoreset.core import WeightedPointSet


def ball_points(rng, n, d, radius=1.0):
    """Uniform points in the ball of the given radius."""
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * radius * rng.random(n)[:, None] ** (1.0 / d)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_set(rng):
    return WeightedPointSet(ball_points(rng, 40, 3))


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record and print the one-line verdict of an acceptance criterion."""
    def record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
