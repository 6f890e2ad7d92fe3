import numpy as np
import pytest

from extremal.rng import RandomStream


@pytest.fixture
def stream():
    return RandomStream(20260101)


class ZeroStream:
    """Stub stream whose draws are all zero (uniforms are 0.5)."""

    def standard_normal(self, n):
        return np.zeros(n)

    def laplace(self, n):
        return np.zeros(n)

    def random(self, n):
        return np.full(n, 0.5)


@pytest.fixture
def zero_stream():
    return ZeroStream()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k][1])
