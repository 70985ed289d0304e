"""D-RAN: each RRS picks its user's rate from local delayed CSI and decodes
treating interference as noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fsmc import MarkovChannelSpec, d_step
from .outage_region import eps_bar_for
from .scenario import RatePolicy, Scenario

MAX_COMBOS = 10**6


class EnumerationError(ValueError):
    pass


def instantaneous_rate(S: float, I) -> float:
    """Rate decodable at one RRS treating the other users as noise."""
    return float(np.log2(1.0 + S / (1.0 + float(np.sum(I)))))


@dataclass(frozen=True, eq=False)
class DranCdfTable:
    """Conditional law of the achievable rate given the local delayed CSI.

    ``masses[c, r]`` is the probability that the current rate equals
    ``rates[r]`` when the delayed local combo has flat index ``c``.  The
    ``below`` array holds ``Pr[rate < rates[r]]``, i.e. the CDF evaluated
    strictly below each atom.
    """

    rates: np.ndarray
    masses: np.ndarray
    local_shape: tuple[int, ...]
    delay: int

    @property
    def below(self) -> np.ndarray:
        return _below(self.masses)

    def cdf(self, combo) -> tuple[np.ndarray, np.ndarray]:
        """Support rates (ascending) and cumulative probabilities for one delayed combo."""
        row = self.masses[self._flat(combo)]
        keep = row > 0
        return self.rates[keep], np.cumsum(row[keep])

    def _flat(self, combo) -> int:
        return int(np.ravel_multi_index(tuple(combo), self.local_shape))


def build_cdf(direct: MarkovChannelSpec, cross: MarkovChannelSpec, d_e: int, k: int) -> DranCdfTable:
    """Enumerate current local states weighted by their ``d_e``-step probabilities."""
    if d_e < 0:
        raise ValueError(f"scheduling delay must be non-negative, got {d_e}")
    local_shape = (direct.num_states,) + (cross.num_states,) * (k - 1)
    n = int(np.prod(local_shape))
    if n > MAX_COMBOS:
        raise EnumerationError(f"{n} local states exceed the enumeration cap of {MAX_COMBOS}")

    grid = np.indices(local_shape).reshape(len(local_shape), -1)
    s_cur = direct.levels[grid[0]]
    i_cur = cross.levels[grid[1:]].sum(axis=0) if k > 1 else np.zeros(n)
    rate = np.log2(1.0 + s_cur / (1.0 + i_cur))
    uniq, inverse = np.unique(rate, return_inverse=True)

    # the conditional law of the current combo is a product over processes
    beta_s = d_step(direct, d_e)
    beta_i = d_step(cross, d_e)
    masses = np.zeros((n, uniq.size))
    for c, old in enumerate(zip(*grid)):
        col = beta_s[:, old[0]]
        for x in old[1:]:
            col = np.kron(col, beta_i[:, x])
        masses[c] = np.bincount(inverse, weights=col, minlength=uniq.size)
    return DranCdfTable(uniq, masses, local_shape, d_e)


def _below(masses: np.ndarray) -> np.ndarray:
    out = np.zeros_like(masses)
    out[:, 1:] = np.cumsum(masses[:, :-1], axis=1)
    return out


def _select(rates: np.ndarray, masses: np.ndarray, below: np.ndarray, eps_bar: float) -> np.ndarray:
    ok = (masses > 0) & (below <= eps_bar)
    # the lowest support atom always has nothing below it, so ok has a True per row
    last = masses.shape[1] - 1 - np.argmax(ok[:, ::-1], axis=1)
    return rates[last]


def dran_rate(table: DranCdfTable, combo, eps_bar: float) -> float:
    """Largest support rate whose probability of exceeding the current rate is <= eps_bar."""
    if not 0.0 <= eps_bar <= 1.0:
        raise ValueError(f"eps_bar must lie in [0, 1], got {eps_bar!r}")
    c = table._flat(combo)
    row = table.masses[c:c + 1]
    return float(_select(table.rates, row, _below(row), eps_bar)[0])


def dran_rates_all(table: DranCdfTable, eps_bar: float) -> np.ndarray:
    """Selected rate for every local delayed combo (flat order)."""
    return _select(table.rates, table.masses, table.below, eps_bar)


def dran_policy(scn: Scenario) -> RatePolicy:
    table = build_cdf(scn.direct, scn.cross, scn.d_e, scn.k)
    local = dran_rates_all(table, eps_bar_for("D", scn.k, scn.eps))
    space = scn.space
    rates = np.empty((space.size, scn.k))
    for j in range(scn.k):
        cols = space.indices[:, space.local_processes(j)]
        rates[:, j] = local[np.ravel_multi_index(tuple(cols.T), table.local_shape)]
    return RatePolicy("D-RAN", scn.d_e, rates, "tin", space.weights)


def dran_sum_rate(scn: Scenario) -> float:
    """Stationary average of the per-user inverse-CDF rates, summed over users."""
    table = build_cdf(scn.direct, scn.cross, scn.d_e, scn.k)
    local = dran_rates_all(table, eps_bar_for("D", scn.k, scn.eps))
    w = scn.direct.stationary
    for _ in range(scn.k - 1):
        w = np.kron(w, scn.cross.stationary)
    # all users share the same chains, so each contributes the same expectation
    return float(scn.k * (w @ local))
