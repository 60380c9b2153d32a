from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from medax import kernels

settings.register_profile(
    "medax", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("medax")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    """Run a test once per kernel backend, restoring the default afterwards."""
    prev = kernels.active
    kernels.set_backend(request.param)
    yield request.param
    kernels.active = prev


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
