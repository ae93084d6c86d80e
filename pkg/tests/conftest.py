import itertools

import pytest
from hypothesis import strategies as st

from admmtopo.graph import build_graph, er_corpus

_ACCEPTANCE_LINES: list[str] = []


@st.composite
def connected_graphs(draw, min_n: int = 2, max_n: int = 12):
    """Random spanning tree plus a random subset of the remaining pairs."""
    n = draw(st.integers(min_n, max_n))
    edges = {tuple(sorted((i, draw(st.integers(0, i - 1))))) for i in range(1, n)}
    rest = [e for e in itertools.combinations(range(n), 2) if e not in edges]
    if rest:
        extra = draw(st.lists(st.sampled_from(rest), unique=True, max_size=len(rest)))
        edges.update(extra)
    return build_graph(n, sorted(edges))


rhos = st.floats(0.05, 4.0, allow_nan=False)
gammas = st.floats(0.05, 1.95, allow_nan=False)


@pytest.fixture(scope="session")
def corpus():
    return er_corpus(30, 4, 10, seed=42)


@pytest.fixture
def acceptance_line():
    def record(number: int, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
