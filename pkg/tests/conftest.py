"""Shared fixtures: small graphs and transition models reused across modules."""

import numpy as np
import pytest

from walklab import graphs


@pytest.fixture(scope="session")
def er_small():
    """50-node, 200-edge ER graph with minimum degree >= 2."""
    return graphs.gen_erdos_renyi(50, 200, seed=0)


@pytest.fixture(scope="session")
def er_model(er_small):
    """Unbiased walk model on the small ER graph."""
    return graphs.unbiased_transition_model(er_small)


@pytest.fixture(scope="session")
def weighted_model(er_small):
    """Biased (kappa=1) walk model on the small ER graph."""
    wg = graphs.assign_weights(er_small, kappa=1.0, k_min=1, k_max=1000, seed=2)
    return graphs.build_transition_model(wg)


@pytest.fixture(scope="session")
def cycle5_model():
    """Deterministic 5-cycle as an undirected graph; every row is (1/2, 1/2)."""
    edges = np.array([[0, 1], [1, 2], [2, 3], [3, 4], [0, 4]])
    return graphs.unbiased_transition_model(graphs.Graph(5, edges))
