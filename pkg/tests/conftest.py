import numpy as np
import pytest

from thzspi.patterns import make_basis
from thzspi.scene import builtin_scene
from thzspi.simulator import TimeGrid, ideal_cube, synthesize_pulse


@pytest.fixture(scope="session")
def grid():
    return TimeGrid()


@pytest.fixture(scope="session")
def pulse(grid):
    return synthesize_pulse(grid)


@pytest.fixture(scope="session")
def tz_scene():
    return builtin_scene("tz-hdpe-16")


@pytest.fixture(scope="session")
def tz_cube(tz_scene, pulse):
    return ideal_cube(tz_scene, pulse)


@pytest.fixture(scope="session")
def lactose_scene():
    return builtin_scene("lactose-l-8")


@pytest.fixture(scope="session")
def basis16():
    return make_basis(16, "sequency2d")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion."""
    def report(label, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
