import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stmh.graphs import Graph

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_graph(p, density, rng):
    ind = (rng.random(p * (p - 1) // 2) < density).astype(np.uint8)
    return Graph.from_indicator(p, ind)


def path_graph(p):
    return Graph(p, [(i, i + 1) for i in range(p - 1)])


def star_graph(p):
    return Graph(p, [(0, j) for j in range(1, p)])
