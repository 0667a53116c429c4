import sys
from pathlib import Path

import pytest

from commscore.graph import Graph

sys.path.insert(0, str(Path(__file__).parent))

G1_EDGES = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]


@pytest.fixture
def g1():
    return Graph.from_edges(G1_EDGES)


def clique_edges(nodes):
    nodes = list(nodes)
    return [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:]]


@pytest.fixture
def barbell5():
    return Graph.from_edges(clique_edges(range(5)) + clique_edges(range(5, 10)) + [(4, 5)])


@pytest.fixture
def two_triangles():
    return Graph.from_edges([(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
