from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from transrobust.fileio import parse_diff, parse_fst, parse_wa
from transrobust.similarity import manhattan_table, standard_manhattan

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile(
    "repo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


def load_fst(name):
    return parse_fst((FIXTURES / name).read_text())


def load_wa(name):
    return parse_wa((FIXTURES / name).read_text())


def load_diff(name):
    return parse_diff((FIXTURES / name).read_text())


@pytest.fixture
def t_nr():
    return load_fst("t_nr.fst")


@pytest.fixture
def t_r():
    return load_fst("t_r.fst")


@pytest.fixture
def man():
    return standard_manhattan("ab")


@pytest.fixture
def man_table():
    return manhattan_table("ab")


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
