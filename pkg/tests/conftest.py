import sys

import numpy as np
import pytest

from levysup import Brownian, Cauchy, EntranceConfig, SubordinatorMinusDrift

# small Monte Carlo budget for unit tests of the stable machinery
SMALL = EntranceConfig(n_paths=200_000, n_batches=8, killed_paths=40_000)


@pytest.fixture(scope="session")
def bm():
    return Brownian(1.0, 0.0)


@pytest.fixture(scope="session")
def cauchy():
    return Cauchy(1.0)


@pytest.fixture(scope="session")
def smd():
    return SubordinatorMinusDrift(0.5, 1.0, 1.0)


@pytest.fixture(scope="session")
def small_cfg():
    return SMALL


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
