import time
from contextlib import contextmanager

import pytest

from aqrm import kernels

ACCEPTANCE_LINES = []


def pytest_report_header(config):
    return f"aqrm kernel backend: {kernels.BACKEND}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(params=["python", "cython"])
def backend(request):
    try:
        return kernels.backend_module(request.param)
    except ImportError:
        pytest.skip("compiled core not built")


@pytest.fixture
def criterion():
    """Context manager that times a criterion and records a PASS/FAIL line."""
    @contextmanager
    def run(number, title, budget):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            within = elapsed < budget
            status = "PASS" if ok and within else "FAIL"
            ACCEPTANCE_LINES.append(f"criterion {number}: {status}  {title}  [{elapsed:.2f} s, budget {budget:g} s]")
            print(ACCEPTANCE_LINES[-1])
        assert within, f"criterion {number} took {elapsed:.2f} s, budget {budget} s"
    return run
