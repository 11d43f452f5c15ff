from pathlib import Path

import pytest

from horngraphs.chc import parse_system
from horngraphs.datasets import gen_corpus

DATA = Path(__file__).resolve().parents[1] / "src" / "horngraphs" / "data"

RUNNING_EXAMPLE = (DATA / "running_example.chc").read_text()

# the loop clause exactly as the normalized table prints it (guard on x, no n = n')
TABLE_VARIANT = """\
L(x,y,n) :- n >= 0, x = n, y = n.
L(x,y,n) :- L(x',y',n'), x != 0, x = x' - 1, y = y' - 1.
false :- L(x,y,n), x = 0, y != 0.
"""

# acceptance results collected here and echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def running_example():
    return parse_system(RUNNING_EXAMPLE)


@pytest.fixture
def table_variant():
    return parse_system(TABLE_VARIANT)


@pytest.fixture(scope="session")
def corpus():
    return gen_corpus(200, seed=0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
