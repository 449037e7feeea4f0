import pytest

from kmcalogero.arith import SqrtOneTable

# acceptance lines collected during the run and echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []

_tables: dict[int, SqrtOneTable] = {}


def table_for(R: int) -> SqrtOneTable:
    """Session-wide cache; reuses a bigger table when one exists."""
    for size, tab in sorted(_tables.items()):
        if size >= R:
            return tab
    tab = SqrtOneTable.build(R)
    _tables[R] = tab
    return tab


@pytest.fixture(scope="session")
def small_table():
    return table_for(20_000)


@pytest.fixture(scope="session")
def table_4e5():
    return table_for(400_000)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
