import re

import pytest

from horizon_probe.model import EssParams

# criterion number -> "PASS" / "FAIL" / "SKIP (...)"
ACCEPTANCE_RESULTS: dict[int, str] = {}
_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_")


@pytest.fixture
def params():
    return EssParams()


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.skipped:
        reason = report.longrepr[-1] if isinstance(report.longrepr, tuple) else ""
        ACCEPTANCE_RESULTS[k] = f"SKIP ({reason.removeprefix('Skipped: ')})"
    elif report.failed:
        ACCEPTANCE_RESULTS[k] = "FAIL"
    elif report.when == "call" and k not in ACCEPTANCE_RESULTS:
        ACCEPTANCE_RESULTS[k] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {k:2d}: {ACCEPTANCE_RESULTS[k]}")
