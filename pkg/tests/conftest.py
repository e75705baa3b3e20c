import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from kcheeger.graph import Graph, generate


@st.composite
def graphs(draw, min_n=1, max_n=9, connected=False):
    """Random simple graph; ``connected`` forces a spanning path under a random labelling."""
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    edges = set(chosen)
    if connected:
        order = draw(st.permutations(range(n)))
        edges |= {tuple(sorted(p)) for p in zip(order, order[1:])}
    return Graph(n, edges)


def random_connected(rng, n, p=0.4):
    """Connected G(n, p) sample by rejection on a numpy Generator."""
    while True:
        g = generate("gnp", seed=int(rng.integers(2**63)), n=n, p=p)
        if g.is_connected():
            return g


@pytest.fixture
def k4():
    return generate("complete", n=4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for the acceptance summary, then return the flag."""

    def record(label, ok, detail=""):
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
