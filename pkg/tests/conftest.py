import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kstab.poly import MultiPoly  # noqa: E402


def poly(terms, nvars=3):
    return MultiPoly({a: Fraction(c) for a, c in terms.items()}, nvars)


@pytest.fixture
def conic():
    return poly({(1, 0, 1): 1, (0, 2, 0): -1})


@pytest.fixture
def fermat():
    return poly({(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1})


@pytest.fixture
def line():
    return poly({(1, 0, 0): 1})


ACCEPTANCE_LINES: dict = {}


def record(key, ok, detail):
    line = f"criterion {key}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES[key] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES, key=str):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
