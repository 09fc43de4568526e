import numpy as np
import pytest

from nonholo import pack


def rand_unit(rng) -> np.ndarray:
    g = rng.standard_normal(3)
    return g / np.linalg.norm(g)


def rand_state(rng) -> np.ndarray:
    """A random phase point with gamma on the unit sphere."""
    return pack(rng.standard_normal(3), rand_unit(rng))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
