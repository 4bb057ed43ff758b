import itertools

import pytest

from hitlab.engine.graph_model import GraphSample, is_connected, sample_er_graph


def complete_graph(n: int, p: float = 1.0) -> GraphSample:
    return GraphSample.from_edges(n, itertools.combinations(range(n), 2), p=p)


def connected_sample(n: int, p: float, seed: int) -> GraphSample:
    """First connected G(n, p) sample at seed, seed + 1, ..."""
    while True:
        g = sample_er_graph(n, p, seed)
        if is_connected(g):
            return g
        seed += 1


@pytest.fixture
def k3() -> GraphSample:
    return complete_graph(3)


@pytest.fixture
def k4() -> GraphSample:
    return complete_graph(4)


@pytest.fixture
def path3() -> GraphSample:
    """0 - 1 - 2"""
    return GraphSample.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def single_edge() -> GraphSample:
    return GraphSample.from_edges(2, [(0, 1)])


@pytest.fixture
def star5() -> GraphSample:
    """Centre 0, leaves 1..4."""
    return GraphSample.from_edges(5, [(0, k) for k in range(1, 5)])


@pytest.fixture
def two_edges() -> GraphSample:
    """Edges 0-1 and 2-3, disconnected."""
    return GraphSample.from_edges(4, [(0, 1), (2, 3)])
