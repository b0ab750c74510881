import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qvk", max_examples=60, deadline=None)
settings.load_profile("qvk")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    n = int(report.nodeid.rsplit("_", 1)[1])
    if report.when == "call" or report.failed or report.skipped:
        ok = report.passed if report.when == "call" else False
        _criteria[n] = _criteria.get(n, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _criteria[n] else 'FAIL'}")
