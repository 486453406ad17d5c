import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_instance(rng, T, max_segments=6, decimals=None):
    """Random scores with a handful of label segments; optional rounding creates ties."""
    y = np.zeros(T, dtype=np.int8)
    for _ in range(rng.integers(0, max_segments + 1)):
        start = rng.integers(0, T)
        y[start:start + rng.integers(1, max(2, T // 5))] = 1
    s = rng.random(T)
    if decimals is not None:
        s = np.round(s, decimals)
    return s, y


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
