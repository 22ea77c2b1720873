import numpy as np
import pytest

from robusteig import edge_list, from_edge_list

# the 7-node test graph (0-based edges)
SEVEN_NODE_EDGES = [(0, 1), (0, 2), (1, 2), (2, 0), (2, 4), (2, 6),
                    (3, 2), (3, 4), (4, 3), (5, 6), (6, 5)]

# its link matrix, written out entry by entry
SEVEN_NODE_DENSE = np.array([
    [0,   0, 1/3, 0,   0, 0, 0],
    [1/2, 0, 0,   0,   0, 0, 0],
    [1/2, 1, 0,   1/2, 0, 0, 0],
    [0,   0, 0,   0,   1, 0, 0],
    [0,   0, 1/3, 1/2, 0, 0, 0],
    [0,   0, 0,   0,   0, 0, 1],
    [0,   0, 1/3, 0,   0, 1, 0],
])

# its dominant eigenvector: all mass on the absorbing 2-cycle {5, 6}
SEVEN_NODE_XBAR = np.array([0, 0, 0, 0, 0, 0.5, 0.5])


@pytest.fixture(scope="session")
def seven_node():
    return from_edge_list(edge_list(SEVEN_NODE_EDGES, 7))


def random_stochastic_dense(n, seed, low=0.0, high=1.0):
    """Column-normalized uniform draw; strictly positive when low > 0."""
    rng = np.random.default_rng(seed)
    A = rng.uniform(low, high, (n, n))
    return A / A.sum(axis=0)
