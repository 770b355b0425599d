import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from earthquake_lab.fixtures import GENERIC_FN, filling_pair
from earthquake_lab.teichmueller import fn_to_holonomy

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# one line per acceptance criterion, repeated in the terminal summary so it
# survives output capturing
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def generic_point():
    return fn_to_holonomy(GENERIC_FN)


@pytest.fixture(scope="session")
def pair():
    return filling_pair()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
