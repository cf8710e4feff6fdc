import numpy as np
import pytest

from gcad.graph import AttributedGraph


def random_graph(rng, n, edge_prob=0.15, d=2, labels=False):
    """Erdos-Renyi attributed graph for property tests."""
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < edge_prob
    edges = np.stack([iu[mask], ju[mask]], axis=1)
    attrs = rng.normal(size=(n, d))
    lab = None
    if labels:
        lab = (rng.random(n) < 0.1).astype(np.int64)
        lab[0] = 1  # both classes present
        lab[1] = 0
    return AttributedGraph(n=n, edges=edges, attrs=attrs, labels=lab)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def path3():
    """Path 0-1-2 with 1-D attributes (0, 1, 2)."""
    return AttributedGraph(
        n=3,
        edges=np.array([[0, 1], [1, 2]]),
        attrs=np.array([[0.0], [1.0], [2.0]]),
    )
