import time

import numpy as np
import pytest

from yamabe_lab import duffing, yamabe_ode
from yamabe_lab.series import w_recurrence


@pytest.fixture(scope="session")
def series60():
    return w_recurrence(60)


@pytest.fixture(scope="session")
def ode_solution():
    return yamabe_ode.integrate_v()


@pytest.fixture(scope="session")
def duffing_series():
    return duffing.build_series(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = pytest.StashKey[dict]()
_START = pytest.StashKey[float]()
SUITE_BUDGET = 120.0


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = {}
    config.stash[_START] = time.perf_counter()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[_ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash[_ACCEPTANCE]
    if not log:
        return
    elapsed = time.perf_counter() - config.stash[_START]
    terminalreporter.section("acceptance criteria")
    for k in sorted(log):
        terminalreporter.write_line(log[k][1])
    verdict = "PASS" if elapsed < SUITE_BUDGET else "FAIL"
    terminalreporter.write_line(f"CRITERION 11 (suite runtime): {verdict}: "
                                f"{elapsed:.1f} s against {SUITE_BUDGET:.0f} s")
