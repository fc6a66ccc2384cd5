import os
import sys

import pytest
from hypothesis import settings

from isounit import kernels

sys.path.insert(0, os.path.dirname(__file__))

# first calls pay numba compilation, so per-example deadlines are meaningless
settings.register_profile("isounit", deadline=None)
settings.load_profile("isounit")

ACCEPTANCE_LINES = []


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param


@pytest.fixture
def record_criterion():
    def record(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
