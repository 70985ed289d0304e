"""Outage sum-rate regions built from percentile channel states.

Each fading process is replaced by the highest level that the current
state falls below with probability at most ``eps_bar`` given the delayed
observation.  Because every gain enters the joint-decoding log-det
positively, the capacity region at those surrogate levels is contained in
the true current region except on an event of probability at most
``1 - (1 - eps_bar)^P`` over the ``P`` processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .capacity import CapacityOracle, CapacityRegion
from .fsmc import MarkovChannelSpec, d_step, percentile_indices
from .lattice import StateSpace, subsets


def eps_bar_for(split: str, k: int, eps: float) -> float:
    """Per-process (C) or per-user (D, F) outage budget that keeps the total at ``eps``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps!r}")
    key = split.upper()[:1]
    if key in ("D", "F"):
        power = 1.0 / k
    elif key == "C":
        power = 1.0 / k**2
    else:
        raise ValueError(f"unknown split {split!r}")
    return float(-np.expm1(power * np.log1p(-eps))) if eps < 1.0 else 1.0


@dataclass(frozen=True)
class OutageRegionSpec:
    delay: int
    eps_bar: float
    source: tuple[int, ...]
    percentile: tuple[int, ...]


def percentile_maps(direct: MarkovChannelSpec, cross: MarkovChannelSpec, d: int,
                    eps_bar: float) -> tuple[np.ndarray, np.ndarray]:
    """Percentile state of every delayed direct and cross state."""
    return (percentile_indices(d_step(direct, d), eps_bar),
            percentile_indices(d_step(cross, d), eps_bar))


def percentile_lattice(space: StateSpace, d: int, eps_bar: float) -> np.ndarray:
    """Percentile joint state (index rows) for every delayed joint state of ``space``."""
    pct_s, pct_i = percentile_maps(space.direct, space.cross, d, eps_bar)
    idx = space.indices
    out = np.empty_like(idx)
    out[:, :space.k] = pct_s[idx[:, :space.k]]
    out[:, space.k:] = pct_i[idx[:, space.k:]]
    return out


def outage_region_spec(space: StateSpace, delayed: Sequence[int], d: int,
                       eps_bar: float) -> OutageRegionSpec:
    pct_s, pct_i = percentile_maps(space.direct, space.cross, d, eps_bar)
    delayed = tuple(int(x) for x in delayed)
    if len(delayed) != space.num_processes:
        raise ValueError(f"expected {space.num_processes} process indices, got {len(delayed)}")
    pct = tuple(int(pct_s[x]) for x in delayed[:space.k]) + \
        tuple(int(pct_i[x]) for x in delayed[space.k:])
    return OutageRegionSpec(d, eps_bar, delayed, pct)


def outage_region(direct: MarkovChannelSpec, cross: MarkovChannelSpec, delayed: Sequence[int],
                  d: int, eps_bar: float, oracle: CapacityOracle) -> CapacityRegion:
    """Region whose rates are decodable w.p. >= (1 - eps_bar)^P given the delayed state."""
    space = StateSpace(oracle.k, direct, cross, max_states=np.inf)
    spec = outage_region_spec(space, delayed, d, eps_bar)
    g = space.gains(np.array(spec.percentile)[None, :])
    return CapacityRegion({s: float(oracle.estimate_many(s, g)[0][0]) for s in subsets(oracle.k)})
