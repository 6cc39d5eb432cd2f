import numpy as np
import pytest

from polyberg.params import SpaceParams

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []

NS = (1, 2, 3)
MS = (1, 2, 3, 4)
ALPHAS = (-0.5, 0.0, 1.7)


def grid(ns=NS, ms=MS, alphas=ALPHAS):
    return [SpaceParams(n, m, a) for n in ns for m in ms for a in alphas]


def cell_id(p: SpaceParams) -> str:
    return f"n{p.n}-m{p.m}-a{p.alpha:g}"


@pytest.fixture
def rng(request):
    # a stable stream per test, independent of test ordering
    key = [ord(c) for c in request.node.nodeid]
    return np.random.default_rng(np.random.SeedSequence(key))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
