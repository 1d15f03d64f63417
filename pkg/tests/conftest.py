import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_bounded_lp(rng, m, n, box=True):
    """Random instance with the origin feasible; a box keeps it bounded."""
    from ddlp.lp import LpInstance

    a = rng.uniform(-1, 1, (m, n))
    b = rng.uniform(0.1, 1.0, m)
    if box:
        a = np.vstack([a, np.eye(n), -np.eye(n)])
        b = np.concatenate([b, np.full(2 * n, 2.0)])
    return LpInstance(rng.uniform(-1, 1, n), a, b)


ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    """Record one pass/fail line for an acceptance criterion."""
    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
