import math

import numpy as np
import pytest

from kdvlab import assemble_operator, make_grid

TWO_PI = 2 * math.pi


@pytest.fixture(scope="session")
def grid512():
    return make_grid(TWO_PI, 512)


@pytest.fixture(scope="session")
def op512(grid512):
    return assemble_operator(grid512)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# ---------------------------------------------------------------- acceptance summary

_CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, passed, detail, part="")``."""

    def record(number, passed, detail, part=""):
        _CRITERIA[(number, part)] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, part in sorted(_CRITERIA):
        passed, detail = _CRITERIA[(number, part)]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
