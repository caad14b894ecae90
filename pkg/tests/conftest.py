import numpy as np
import pytest

from models.sphere import random_direction


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_directions(rng):
    def draw(count):
        return [random_direction(rng) for _ in range(count)]
    return draw
