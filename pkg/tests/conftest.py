import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sigstream.stream import PiecewiseLinearPath  # noqa: E402


@pytest.fixture
def lpath():
    return PiecewiseLinearPath.from_points([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    n, title = crit
    prev = _CRITERIA.get(n, (title, True, 0.0))
    _CRITERIA[n] = (title, prev[1] and report.passed, prev[2] + report.duration)


def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        item.user_properties.append(("criterion", tuple(mark.args)))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, secs = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {title}  ({secs:.2f} s)")
