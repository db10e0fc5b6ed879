import numpy as np
import pytest
from hypothesis import strategies as st

from centrality_gnn.graph import Graph, from_edge_list, is_connected


def random_graph(rng, n, p):
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return from_edge_list(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def random_connected_graph(rng, n_min=2, n_max=7, p=0.5):
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        g = random_graph(rng, n, p)
        if is_connected(g):
            return g


@st.composite
def graphs(draw, n_min=1, n_max=12):
    n = draw(st.integers(n_min, n_max))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, tuple(p for p, keep in zip(pairs, mask) if keep))


def finite_difference(f, x, h=1e-5):
    """Central differences of scalar ``f`` at every entry of array ``x`` (modified in place, restored)."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = x[idx]
        x[idx] = old + h
        up = f()
        x[idx] = old - h
        down = f()
        x[idx] = old
        grad[idx] = (up - down) / (2 * h)
    return grad


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(1e-8, np.abs(a) + np.abs(b))))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
