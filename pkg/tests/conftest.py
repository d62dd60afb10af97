import pytest

from telerate.environment import load_shipped_environment, sample_obstacles
from telerate.riskfield import ControlParams
from telerate.simulator import SimConfig


@pytest.fixture(scope="session")
def params():
    return ControlParams()


@pytest.fixture(scope="session")
def sim_config():
    return SimConfig()


@pytest.fixture(scope="session")
def env1():
    return load_shipped_environment("env1")


@pytest.fixture(scope="session")
def env1_cloud(env1, params):
    return sample_obstacles(env1.map, params.sample_resolution)
