import functools

import pytest

from acif.oracle import GridOracle
from acif.problems import builtin_registry

FSP9_EPS = 4e-4
FSP9_MINIMIZER = 0.95019236


@functools.lru_cache(maxsize=None)
def fsp9(delta_mult: float = 10.0):
    return builtin_registry()["fsp-9"].build(FSP9_EPS, f"{delta_mult:g}*eps")


@functools.lru_cache(maxsize=None)
def fsp9_oracle():
    return GridOracle(fsp9())


@pytest.fixture
def registry():
    return builtin_registry()


# ------------------------------------------------- acceptance criteria report

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    n, title = crit
    entry = _criteria.setdefault(n, {"title": title, "ok": True, "ran": False})
    if report.when == "call" or (report.when == "setup" and report.failed):
        entry["ran"] = True
        entry["ok"] &= report.passed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        status = "PASS" if e["ok"] and e["ran"] else ("FAIL" if e["ran"] else "NOT RUN")
        terminalreporter.write_line(f"criterion {n}: {status}  {e['title']}")
