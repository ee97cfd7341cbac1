import hypothesis
import numpy as np
import pytest

from netconsensus import netgraph

hypothesis.settings.register_profile(
    "suite", deadline=None, max_examples=50, derandomize=True)
hypothesis.settings.load_profile("suite")


def random_h1_graph(rng, n, scale=0.6, extra_prob=0.6):
    """Strongly connected random digraph: a directed ring plus random extra
    edges, zero diagonal.  Strong connectivity makes zero a simple
    Laplacian eigenvalue."""
    w = rng.uniform(0.1, scale, size=(n, n)) * (rng.random((n, n)) < extra_prob)
    for i in range(n):
        w[i, (i + 1) % n] = max(w[i, (i + 1) % n], 0.3)
    np.fill_diagonal(w, 0.0)
    return netgraph.WeightedDigraph(w)


def random_nonnegative_graph(rng, n, scale=1.0, density=0.7):
    """Arbitrary nonnegative weights; no connectivity guarantee."""
    w = rng.uniform(0.0, scale, size=(n, n)) * (rng.random((n, n)) < density)
    np.fill_diagonal(w, 0.0)
    return netgraph.WeightedDigraph(w)


def grid_times(t_end, h, count=41):
    """Evenly spread times that sit exactly on the step-h grid."""
    steps = int(round(t_end / h))
    idx = np.unique(np.round(np.linspace(0, steps, count)).astype(int))
    return idx * h


@pytest.fixture
def rng():
    return np.random.default_rng(20160903)


@pytest.fixture
def two_node():
    """Symmetric unit-weight pair: the workhorse example."""
    return netgraph.laplacian(netgraph.WeightedDigraph([[0.0, 1.0], [1.0, 0.0]]))
