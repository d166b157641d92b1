import functools
from fractions import Fraction

import pytest

from seqnet.massaction import ModelParams
from seqnet.witness import find_witness

F = Fraction

# exact core rates (r1..rn, r_{n+2}) and epsilon of the two worked K~_{6,5} examples
EXAMPLE_ONES = dict(m=6, n=5, core=[F(2), F(1), F(6), F(7), F(1), F(5)], eps=F(6, 1000))
EXAMPLE_ALT = dict(m=6, n=5, core=[F(3), F(6), F(6), F(18), F(2), F(5)], eps=F(6, 100))

GRID = [(m, n) for m in range(2, 7) for n in range(3, 12, 2)]

ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def example_witness(which: str):
    ex = EXAMPLE_ONES if which == "ones" else EXAMPLE_ALT
    return find_witness(
        ModelParams(ex["m"], ex["n"]), mode="user", core=ex["core"], eps0=ex["eps"], max_rounds=1
    )


@functools.lru_cache(maxsize=None)
def grid_witness(m: int, n: int):
    return find_witness(ModelParams(m, n))


@pytest.fixture
def acceptance_report():
    def report(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
