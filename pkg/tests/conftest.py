import pytest

from apkinetic.grids import SpatialGrid, make_equilibrium

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def sgrid():
    return SpatialGrid(64)


@pytest.fixture(scope="session")
def gauss():
    return make_equilibrium("gaussian")


@pytest.fixture(scope="session")
def heavy():
    return make_equilibrium("heavytail")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
