import numpy as np
import pytest

from robustgsl.graph import SparseGraph
from robustgsl.linalg import make_rng


@pytest.fixture
def rng():
    return make_rng(1234)


def random_undirected_graph(n: int, density: float, rng: np.random.Generator) -> SparseGraph:
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < density
    return SparseGraph.from_edges(n, list(zip(iu[mask].tolist(), ju[mask].tolist())))


def toy_graph(n=8):
    ring = [(i, (i + 1) % n) for i in range(n)]
    return SparseGraph.from_edges(n, ring + [(2, 5)])
