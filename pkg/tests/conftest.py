import numpy as np
import pytest

from oscim.problems import IsingInstance


def random_instance(n, seed, values=(-1.0, 0.0, 1.0), h_scale=0.0):
    """Symmetric instance with couplings drawn uniformly from ``values``."""
    rng = np.random.default_rng(seed)
    A = np.triu(rng.choice(values, size=(n, n)), 1)
    h = rng.normal(0, h_scale, n) if h_scale else None
    return IsingInstance(A + A.T, h)


def random_pm1_instance(n, seed, density=1.0):
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < density
    A = np.triu(np.where(mask, rng.choice([-1.0, 1.0], size=(n, n)), 0.0), 1)
    return IsingInstance(A + A.T)


@pytest.fixture
def triangle_edges():
    return [(1, 2, 1), (1, 3, 1), (2, 3, 1)]
