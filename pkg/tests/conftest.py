from importlib.resources import files

import numpy as np
import pytest

from wemrank.graph import WeightedGraph, largest_connected_component, read_edge_list


def make_graph(edges, n=None):
    if n is None:
        n = 1 + max(max(u, v) for u, v, _ in edges)
    return WeightedGraph.from_edges(n, edges)


def path_graph(weights):
    return make_graph([(i, i + 1, w) for i, w in enumerate(weights)])


def complete_graph(n, w=1.0):
    return make_graph([(i, j, w) for i in range(n) for j in range(i + 1, n)], n)


def star_graph(leaf_weights):
    # node 0 is the centre
    return make_graph([(0, i + 1, w) for i, w in enumerate(leaf_weights)])


def random_graph(rng, n, p=0.3, max_degree=None, wmax=10.0, connected=False):
    """Erdos-Renyi style graph with optional degree cap and weights uniform in (0, wmax]."""
    deg = np.zeros(n, dtype=int)
    edges = []
    if connected:
        # random spanning tree first
        perm = rng.permutation(n)
        for k in range(1, n):
            a, b = int(perm[k]), int(perm[rng.integers(0, k)])
            if max_degree is not None and (deg[a] >= max_degree or deg[b] >= max_degree):
                b = int(perm[k - 1])
            edges.append((a, b))
            deg[a] += 1
            deg[b] += 1
    present = {frozenset(e) for e in edges}
    for i in range(n):
        for j in range(i + 1, n):
            if frozenset((i, j)) in present or rng.random() >= p:
                continue
            if max_degree is not None and (deg[i] >= max_degree or deg[j] >= max_degree):
                continue
            edges.append((i, j))
            deg[i] += 1
            deg[j] += 1
    ws = wmax * (1.0 - rng.random(len(edges)))  # (0, wmax]
    return WeightedGraph.from_edges(n, [(a, b, float(w)) for (a, b), w in zip(edges, ws)])


@pytest.fixture(scope="session")
def lesmis():
    return largest_connected_component(read_edge_list(files("wemrank") / "data" / "lesmis.edges"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
