import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def kron_stp(a, b):
    """Semi-tensor product straight from its Kronecker definition."""
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    n, p = a.shape[1], b.shape[0]
    t = math.lcm(n, p)
    return np.kron(a, np.eye(t // n)) @ np.kron(b, np.eye(t // p))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
