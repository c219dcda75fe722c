"""Per-criterion PASS/FAIL summary for the acceptance suite.

Tests marked ``@pytest.mark.criterion(n)`` are grouped by ``n``; a criterion
passes when every test in its group passes.  Tests may attach a short
measurement line through the ``criterion_note`` fixture.
"""

import pytest

TITLES = {
    1: "multiplier reconciliation (reduced and hybrid vs Monte Carlo)",
    2: "origin anchor",
    3: "decay against the model bound",
    4: "partition suite",
    5: "support-volume scaling",
    6: "L2 summability threshold",
    7: "region geometry",
    8: "operator checks",
    9: "tool-level oracles",
}

_outcomes: dict[int, list[bool]] = {}
_notes: dict[int, list[str]] = {}


def _criterion(item):
    mark = item.get_closest_marker("criterion")
    return None if mark is None else int(mark.args[0])


@pytest.fixture
def criterion_note(request):
    n = _criterion(request.node)

    def note(text: str):
        _notes.setdefault(n, []).append(text)

    return note


def pytest_runtest_logreport(report):
    n = report.__dict__.get("criterion")
    if n is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(n, []).append(report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    outcome.get_result().__dict__["criterion"] = _criterion(item)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(TITLES):
        if n not in _outcomes:
            continue
        verdict = "PASS" if all(_outcomes[n]) else "FAIL"
        tr.write_line(f"criterion {n}: {verdict}  ({TITLES[n]})")
        for text in _notes.get(n, []):
            tr.write_line(f"    {text}")
