import time

import pytest

from periodic_curves.curves import compute_branches
from periodic_curves.verify import euler_crosscheck, verify_branch

_PIPELINES = {}
ACCEPTANCE_LINES = []


def run_pipeline(p):
    """Branches, per-branch checks and the Euler report for one period.

    The first call per period is timed; later calls reuse the result.
    """
    if p not in _PIPELINES:
        start = time.perf_counter()
        branches = compute_branches(p)["kept"]
        checks = [verify_branch(b, p) for b in branches]
        report = euler_crosscheck(p, branches, [c.entry for c in checks], branch_checks=checks)
        _PIPELINES[p] = {
            "branches": branches,
            "checks": checks,
            "report": report,
            "elapsed": time.perf_counter() - start,
        }
    return _PIPELINES[p]


@pytest.fixture(scope="session")
def pipeline():
    return run_pipeline


@pytest.fixture(scope="session")
def record_criterion():
    def record(number, ok, detail):
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
