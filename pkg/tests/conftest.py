import pathlib

import pytest

from riskmdp.mdp import read_mdp
from riskmdp.policy import parse_policy
from riskmdp.utility import parse_utility

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def load_mdp(name):
    return read_mdp(FIXTURES / f"{name}.mdp")


def load_policy(name):
    return parse_policy((FIXTURES / f"{name}.policy").read_text())


def load_utility(name):
    return parse_utility((FIXTURES / f"{name}.utility").read_text())


@pytest.fixture
def fig1a():
    return load_mdp("fig1a")


@pytest.fixture
def fig3a():
    return load_mdp("fig3a")


@pytest.fixture
def pi1():
    return load_policy("fig1a_pi1")


@pytest.fixture
def pi2():
    return load_policy("fig1a_pi2")


@pytest.fixture
def go2():
    return load_policy("go2")


@pytest.fixture
def go3():
    return load_policy("go3")


# --- acceptance criterion tally -------------------------------------------

_CRITERIA: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when == "teardown":
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "ok": True, "tests": 0})
    if report.when == "call":
        entry["tests"] += 1
    if report.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "PASS" if e["ok"] and e["tests"] else "FAIL"
        terminalreporter.write_line(f"{status} criterion {n:2d}: {e['title']}")
