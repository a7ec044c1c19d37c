import os

import pytest
from hypothesis import HealthCheck, settings

from magiccert.automaton import quotient_automaton
from magiccert.ncgroebner import magic_basis
from magiccert.projalg import build_M, build_R

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_bases = {}
CRITERIA = {}


def basis(n):
    if n not in _bases:
        _bases[n] = magic_basis(n)
    return _bases[n]


@pytest.fixture(scope="session")
def gb4():
    return basis(4)


@pytest.fixture(scope="session")
def dfa4(gb4):
    return quotient_automaton(gb4)


@pytest.fixture(scope="session")
def gb5():
    return basis(5)


@pytest.fixture(scope="session")
def gb6():
    return basis(6)


@pytest.fixture(scope="session")
def model_M():
    return build_M()


@pytest.fixture(scope="session")
def model_R():
    return build_R()


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(number, ok, detail):
        CRITERIA[number] = (ok, detail)
        print(f"criterion {number}: {_status(ok)} ({detail})")
        return ok

    return record


def _status(ok):
    return "SKIP" if ok is None else ("PASS" if ok else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {_status(ok)}  {detail}")
