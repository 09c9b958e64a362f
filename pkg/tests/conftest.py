"""Shared fixtures and the acceptance-criteria summary hook."""
import numpy as np
import pytest
from hypothesis import settings

import hmvp

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

# populated by tests/test_acceptance.py: number -> (passed, detail)
ACCEPTANCE_RESULTS = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict} - {detail}")


@pytest.fixture(scope="session")
def reference_cov():
    return hmvp.reference_instance()


@pytest.fixture(scope="session")
def reference_dense():
    return hmvp.reference_matrix()


@pytest.fixture()
def rng():
    return np.random.default_rng(20260822)
