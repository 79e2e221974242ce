from fractions import Fraction

import pytest

from qubodr.core import QuboMatrix

# The running two-variable example: a benign matrix and the same matrix
# with its huge diagonal entry pulled back to -2.
EX1_ROWS = [[0.8, -1.5], [0, -1000]]
EX1P_ROWS = [[0.8, -1.5], [0, -2]]

# Reference dynamic ranges of the two matrices, frozen from exact
# log2((max - min) / min gap) over {-1000, -1.5, 0, 0.8} and {-2, -1.5, 0, 0.8}.
EX1_DR = 10.28886607416582
EX1P_DR = 2.4854268271702415

# One summary line per acceptance criterion, echoed after the test run
# (terminal-summary output bypasses capture).
CRITERION_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    for line in CRITERION_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def ex1() -> QuboMatrix:
    return QuboMatrix.from_dense(EX1_ROWS)


@pytest.fixture
def ex1p() -> QuboMatrix:
    return QuboMatrix.from_dense(EX1P_ROWS)


@pytest.fixture
def ex1p_decimal() -> QuboMatrix:
    # same matrix on the exact decimal lattice (0.8 as 4/5, not the float)
    return QuboMatrix.from_entries(
        2, [(0, 0, Fraction(4, 5)), (0, 1, Fraction(-3, 2)), (1, 1, -2)]
    )
