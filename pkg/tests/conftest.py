import numpy as np
import pytest

from bang.benchmark import replicate_rng


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def seeded():
    """Factory for independent replicate streams: ``seeded(seed, r)``."""
    return replicate_rng


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
