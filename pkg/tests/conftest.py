import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from goebel.theorems import build_table  # noqa: E402

_criteria: dict[str, tuple[str, str]] = {}


@pytest.fixture(scope="session")
def full_table():
    return build_table((2, 17), (2, 17))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    label = getattr(item.function, "criterion", None)
    if label is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _criteria[label] = ("PASS" if report.passed else "FAIL", item.function.__doc__ or "")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=int):
        verdict, doc = _criteria[label]
        terminalreporter.write_line(f"criterion {label:>2}: {verdict}  {doc.strip().splitlines()[0]}")
