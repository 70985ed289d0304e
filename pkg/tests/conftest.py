import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fogran.capacity import CapacityOracle
from fogran.config import NetworkConfig
from fogran.fsmc import MarkovChannelSpec
from fogran.scenario import Scenario

TEST_SAMPLES = 20_000


@pytest.fixture(scope="session")
def default_cfg():
    return NetworkConfig(mc_samples=TEST_SAMPLES, horizon=0)


@pytest.fixture(scope="session")
def default_oracle(default_cfg):
    return default_cfg.make_oracle()


@pytest.fixture(scope="session")
def default_scn(default_cfg, default_oracle):
    return default_cfg.scenario(default_oracle)


@pytest.fixture(scope="session")
def small_scn():
    """K=2 with four direct and three cross states: quick to solve and simulate."""
    cfg = NetworkConfig(n_s=4, n_i=3, mc_samples=TEST_SAMPLES, velocity_kmh=150.0, d_e=1, d_c=1)
    return cfg.scenario(cfg.make_oracle())


@pytest.fixture(scope="session")
def full_oracle():
    return CapacityOracle(2, "full", TEST_SAMPLES, seed=5)


def binary_scenario(oracle, S=3.16, I_L=0.3, I_H=2.0, p=0.1, q=0.2, d_e=1, d_c=0, eps=0.0):
    direct = MarkovChannelSpec(np.array([S]), np.ones((1, 1)), np.ones(1))
    cross = MarkovChannelSpec.two_state(I_L, I_H, p, q)
    return Scenario(2, direct, cross, d_e, d_c, eps, oracle)
