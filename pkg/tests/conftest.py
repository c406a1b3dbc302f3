"""Shared fixtures.

Session recording dominates test runtime, so the canonical recorded pair is
built once per test session and shared read-only (CaptureSession is immutable).
"""

from __future__ import annotations

import pytest

from morphfader import ToyBackend, record_session_pair

CANONICAL_SOURCE = "a dog barking"
CANONICAL_TARGET = "a cat meowing"
CANONICAL_SEED = 0
CANONICAL_STEPS = 20


@pytest.fixture(scope="session")
def backend() -> ToyBackend:
    return ToyBackend()


@pytest.fixture(scope="session")
def session_pair(backend):
    return record_session_pair(
        backend,
        CANONICAL_SOURCE,
        CANONICAL_TARGET,
        seed=CANONICAL_SEED,
        steps=CANONICAL_STEPS,
    )


# -- acceptance summary --------------------------------------------------------
# Tests marked @pytest.mark.criterion(num, title) get one PASS/FAIL line each
# in a dedicated terminal section at the end of the run.

_criteria: dict[str, tuple[int, str]] = {}
_outcomes: dict[str, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria[item.nodeid] = (int(mark.args[0]), str(mark.args[1]))


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    entries = sorted(
        ((num, title, _outcomes.get(nodeid, "not run"))
         for nodeid, (num, title) in _criteria.items()
         if nodeid in _outcomes),
    )
    for num, title, outcome in entries:
        tag = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, "FAIL")
        terminalreporter.write_line(f"[{tag}] criterion {num:2d}: {title}")
