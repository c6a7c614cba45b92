import numpy as np
import pytest

from zscan.synth import SimulatorConfig, synthesize_dataset

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def default_corpus():
    """The full default synthetic corpus: 4 classes x 445 traces x 10,000 points."""
    return synthesize_dataset(SimulatorConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
