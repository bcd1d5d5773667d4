import numpy as np
import pytest

from signedot.measures import SignedGridMeasure, to_support


def random_probability(n, rng, density=1.0):
    """Random probability image; ``density`` is the fraction of occupied pixels."""
    vals = rng.random((n, n))
    if density < 1.0:
        mask = rng.random((n, n)) < density
        mask.flat[rng.integers(n * n)] = True
        vals = vals * mask
    return SignedGridMeasure(n, vals / vals.sum())


def random_pair_supports(n, rng, density=1.0):
    a = random_probability(n, rng, density)
    b = random_probability(n, rng, density)
    return to_support(a)[0], to_support(b)[0]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion, printed at session end."""

    def record(number, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
