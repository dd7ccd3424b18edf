import hypothesis
import numpy as np
import pytest

from divroute.config import SimConfig
from divroute.mission import make_world

hypothesis.settings.register_profile("fast", max_examples=20)
hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session")
def cfg():
    return SimConfig()


@pytest.fixture(scope="session")
def world(cfg):
    """(roadmap with endpoints, truth map, a-priori estimate) for seed 0."""
    return make_world(cfg, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
