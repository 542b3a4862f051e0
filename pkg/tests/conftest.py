import pytest

ACCEPTANCE_LINES: list[str] = []

from fusioncert.graphs import scenario
from fusioncert.strategies import strategy_dataset


@pytest.fixture(scope="session")
def evans_v1():
    return strategy_dataset("evans-werner", {"v": 1})


@pytest.fixture(scope="session")
def md_graph():
    return scenario("measurement-dependence")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split()[0])):
            terminalreporter.write_line(line)
