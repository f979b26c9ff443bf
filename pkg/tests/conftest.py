import numpy as np
import pytest
from hypothesis import settings

from pumi.testdata import franke_cloud

# `pytest --hypothesis-profile=stress` for a long property run
settings.register_profile("stress", max_examples=3000, deadline=None)


@pytest.fixture(scope="session")
def franke1024():
    return franke_cloud(1024)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def record(criterion, ok, detail):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
