"""Outage-constrained adaptive sum rates of D-RAN, C-RAN and F-RAN uplinks
over finite-state Markov fading, with a slot-level simulator to check them."""

from .capacity import CapacityOracle, CapacityRegion, ChannelStateTuple
from .config import NetworkConfig, load_config
from .fsmc import ClarkeParams, MarkovChannelSpec, build_fsmc, d_step, percentile_state
from .scenario import RatePolicy, Scenario

__all__ = ["CapacityOracle", "CapacityRegion", "ChannelStateTuple", "ClarkeParams", "MarkovChannelSpec",
           "NetworkConfig", "RatePolicy", "Scenario", "build_fsmc", "d_step", "load_config",
           "percentile_state"]
__version__ = "0.1.0"
