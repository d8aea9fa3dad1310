import math

import pytest

from logpot.geometry import rectangle, unit_disc

SQRT_PI = math.sqrt(math.pi)


@pytest.fixture
def disc():
    return unit_disc()


@pytest.fixture
def unit_square():
    return rectangle(1.0, 1.0, center=(0.5, 0.5))


@pytest.fixture
def square_pi():
    return rectangle(SQRT_PI, SQRT_PI)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
