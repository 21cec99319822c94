import logging
import sys

import numpy as np
import pytest

from durable_patterns.core import Dataset, Metric


@pytest.fixture(autouse=True)
def keep_log_level():
    # the CLI's main() silences the package logger unless DP_LOG asks otherwise
    logger = logging.getLogger("durable_patterns")
    level = logger.level
    yield
    logger.setLevel(level)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in sorted(verdicts, key=lambda v: int(v.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def make(coords, starts, ends, metric=None):
    return Dataset.from_arrays(coords, starts, ends, metric or Metric.l2())


@pytest.fixture
def t3():
    # p1, p2, p3 of the hand examples are ids 0, 1, 2
    return make([[0, 0], [0.5, 0], [0, 0.5]], [0, 2, 4], [10, 8, 12])


@pytest.fixture
def t4():
    return make([[0, 0], [0.5, 0], [0, 0.5], [0.5, 0.5]], [0, 2, 4, 0], [10, 8, 12, 6])


@pytest.fixture
def s4():
    return make([[0, 0], [0.6, 0], [0.3, 0.3], [0.3, -0.3]], [0, 0, 1, 5], [10, 10, 4, 9])


@pytest.fixture
def u_instance():
    # p=0 and q=1 share [0, 10]; witnesses 2, 3, 4 carry [0,4], [3,10], [5,6]
    return make([[0, 0], [0.1, 0], [0, 0.1], [0.1, 0.1], [0.05, 0.05]],
                 [0, 0, 0, 3, 5], [10, 10, 4, 10, 6])


def random_instance(rng, n, d=2, scale=None, metric=None, mean_length=4.0, horizon=10.0,
                    decimals=None):
    """Uniform points in a box of side ``scale`` with exponential lifespans."""
    scale = scale if scale is not None else float(rng.choice([1.5, 3.0]))
    coords = rng.random((n, d)) * scale
    starts = rng.random(n) * horizon
    if decimals is not None:
        coords = np.round(coords, decimals)
        starts = np.round(starts, decimals)
    lengths = rng.exponential(mean_length, n)
    if decimals is not None:
        lengths = np.round(lengths, decimals)
    return make(coords, starts, starts + lengths, metric)


def between(values, rng):
    """A threshold strictly between two consecutive distinct values, avoiding float ties."""
    v = sorted(set(values))
    if len(v) < 2:
        return (v[0] if v else 0.0) + 0.5
    i = int(rng.integers(0, len(v) - 1))
    return (v[i] + v[i + 1]) / 2
