import numpy as np
import pytest

from cohfluct.acceptance import DEFAULT_SEED

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(DEFAULT_SEED)


@pytest.fixture
def record_acceptance():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split()[0])):
        terminalreporter.write_line(line)
