"""Shared evaluation context: chains, delays, outage budget and capacity tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

from .capacity import CapacityOracle
from .fsmc import MarkovChannelSpec
from .lattice import StateSpace, subsets

Decoding = Literal["tin", "joint"]


@dataclass(eq=False)
class Scenario:
    """One operating point of the uplink: K pairs, fading chains, delays and outage budget.

    ``fran_exponent`` selects the per-process budget used by the general F-RAN
    program: ``"1/K"`` (per user) or ``"1/K^2"`` (per fading process).
    """

    k: int
    direct: MarkovChannelSpec
    cross: MarkovChannelSpec
    d_e: int
    d_c: int
    eps: float
    oracle: CapacityOracle
    fran_exponent: str = "1/K"

    def __post_init__(self):
        if self.oracle.k != self.k:
            raise ValueError(f"oracle built for K={self.oracle.k}, scenario has K={self.k}")
        if self.d_e < 0 or self.d_c < 0:
            raise ValueError("delays must be non-negative")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"eps must lie in [0, 1], got {self.eps!r}")
        if self.fran_exponent not in ("1/K", "1/K^2"):
            raise ValueError(f"fran_exponent must be '1/K' or '1/K^2', got {self.fran_exponent!r}")

    @property
    def d_cloud(self) -> int:
        """CSI age seen by cloud-side control."""
        return self.d_e + self.d_c

    @cached_property
    def space(self) -> StateSpace:
        return StateSpace(self.k, self.direct, self.cross)

    @cached_property
    def subset_list(self) -> list[tuple[int, ...]]:
        return subsets(self.k)

    @cached_property
    def subset_matrix(self) -> np.ndarray:
        """Indicator rows (subset x user) in bitmask order."""
        m = np.zeros((len(self.subset_list), self.k))
        for r, s in enumerate(self.subset_list):
            m[r, list(s)] = 1.0
        return m

    @property
    def bounds(self) -> np.ndarray:
        """Capacity-region bounds of every joint state, ``(size, 2^K - 1)``."""
        return lattice_bounds(self.oracle, self.space)[0]

    @property
    def bound_errors(self) -> np.ndarray:
        return lattice_bounds(self.oracle, self.space)[1]

    @cached_property
    def tin_rates(self) -> np.ndarray:
        """Per-user rates decodable when treating interference as noise, ``(size, K)``."""
        g = self.space.gains()
        own = np.einsum("mjj->mj", g)
        interference = g.sum(axis=2) - own
        return np.log2(1.0 + own / (1.0 + interference))

    def with_(self, **changes) -> "Scenario":
        kw = {f: getattr(self, f) for f in
              ("k", "direct", "cross", "d_e", "d_c", "eps", "oracle", "fran_exponent")}
        kw.update(changes)
        return Scenario(**kw)


_BOUNDS_MEMO: dict = {}


def lattice_bounds(oracle: CapacityOracle, space: StateSpace) -> tuple[np.ndarray, np.ndarray]:
    """Region bounds for every state of ``space``, memoized per oracle and level set."""
    key = (id(oracle), oracle.antenna_mode, space.k,
           space.direct.levels.tobytes(), space.cross.levels.tobytes())
    hit = _BOUNDS_MEMO.get(key)
    if hit is not None and hit[0] is oracle:
        return hit[1], hit[2]
    vals, errs = oracle.region_table(space.gains())
    vals.setflags(write=False)
    errs.setflags(write=False)
    _BOUNDS_MEMO[key] = (oracle, vals, errs)
    return vals, errs


@dataclass(eq=False)
class RatePolicy:
    """Rates chosen in every delayed joint state.

    ``rates[s, j]`` is the rate of user ``j`` when the CSI available to the
    controller (``delay`` slots old) is joint state ``s``.  Outage is judged
    against the current joint region (``joint``) or per-user interference-as-
    noise rates (``tin``).
    """

    name: str
    delay: int
    rates: np.ndarray
    decoding: Decoding
    weights: np.ndarray = field(repr=False)

    @property
    def sum_rates(self) -> np.ndarray:
        return self.rates.sum(axis=1)

    @property
    def analytic_sum_rate(self) -> float:
        return float(self.weights @ self.sum_rates)
