import math

import numpy as np
import pytest

from elaa_isac.runner import default_scenario

DEG = math.pi / 180.0
TRADEOFF_SIDES = {3.5e9: 20, 7.8e9: 31, 15e9: 39}


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


@pytest.fixture(scope="session")
def tradeoff_array(scenario):
    """Trade-off array for a carrier in Hz."""
    cache = {}

    def get(f):
        if f not in cache:
            cache[f] = scenario.array(f, TRADEOFF_SIDES[f])
        return cache[f]

    return get


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


# one line per acceptance criterion, repeated after the run so they survive output capture
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
