import numpy as np
import pytest
from hypothesis import strategies as st

from sfsync.graph import Graph, from_edges


def gnp(n, p, rng, directed_mix=True):
    """Erdos-Renyi style multigraph; edge orientation is random when ``directed_mix``."""
    g = Graph(n)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                if directed_mix and rng.random() < 0.5:
                    g.add_edge(v, u)
                else:
                    g.add_edge(u, v)
    return g


def is_connected(g):
    if g.n_nodes == 0:
        return True
    indptr, indices = g.undirected_csr()
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in indices[indptr[v]:indptr[v + 1]]:
            if int(w) not in seen:
                seen.add(int(w))
                stack.append(int(w))
    return len(seen) == g.n_nodes


def connected_gnp(n, p, rng):
    while True:
        g = gnp(n, p, rng)
        if is_connected(g):
            return g


def path_graph(n):
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves):
    return from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def cycle_graph(n):
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


@st.composite
def small_graphs(draw, min_nodes=3, max_nodes=9, max_edges=20, loops=True):
    n = draw(st.integers(min_nodes, max_nodes))
    node = st.integers(0, n - 1)
    pairs = draw(st.lists(st.tuples(node, node), max_size=max_edges))
    if not loops:
        pairs = [(u, v) for u, v in pairs if u != v]
    return from_edges(n, pairs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
