import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sigrisk.tensor_algebra import AlgebraShape, TruncatedTensor

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_points(rng, m, dim, scale=1.0):
    """Random-walk path with ``m`` points in ``dim`` channels."""
    steps = rng.standard_normal((m - 1, dim)) * scale
    return np.vstack([np.zeros(dim), np.cumsum(steps, axis=0)])


def random_tensor(rng, shape, scale=1.0, group=False):
    data = rng.standard_normal(shape.size) * scale
    if group:
        data[0] = 1.0
    return TruncatedTensor(shape, data)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def shape_2_3():
    return AlgebraShape(2, 3)


# acceptance criteria report ---------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """``criterion(n, title, ok, detail)`` records and prints one pass/fail line, then asserts."""

    def record(n, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
