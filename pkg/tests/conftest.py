import pytest

from gie_lab import ExperimentGeometry, PhysicalConstants

ACCEPTANCE_LINES = []


@pytest.fixture
def bmv_geom():
    return ExperimentGeometry(d=450e-6, delta=250e-6, m1=1e-14, m2=1e-14)


@pytest.fixture
def consts():
    return PhysicalConstants()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
