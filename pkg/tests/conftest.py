import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_image(rng):
    return rng.random((16, 16, 3))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running training tests")


CRITERION_LINES: list[str] = []


def record_criterion(line: str) -> None:
    """Collect an acceptance-criterion verdict for the terminal summary."""
    CRITERION_LINES.append(line)
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
