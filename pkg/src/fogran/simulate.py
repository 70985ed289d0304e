"""Slot-level Monte Carlo of the fading chains under a rate policy.

Every fading process is evolved independently from its stationary law.  At
slot ``t`` the policy reads the joint state at ``t - delay`` and the chosen
rates are checked against the current joint state: against the capacity
bounds for joint decoding, against the interference-as-noise rates
otherwise.  Capacity bounds come from the scenario's cached table, so the
check never re-samples phases.
"""

from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fsmc import MarkovChannelSpec
from .scenario import RatePolicy, Scenario

MEMBERSHIP_TOL = 1e-9
NUM_BATCHES = 100


class HorizonError(ValueError):
    pass


def sample_chain(spec: MarkovChannelSpec, length: int, rng: np.random.Generator,
                 start: int | None = None) -> np.ndarray:
    """One trajectory of ``length`` states; the first is drawn from the stationary law unless given."""
    cum = np.cumsum(spec.transition, axis=0)
    cum[-1] = 1.0
    cols = [c.tolist() for c in cum.T]
    u = rng.random(length)
    out = np.empty(length, dtype=np.int64)
    if start is None:
        pi_cum = np.cumsum(spec.stationary)
        pi_cum[-1] = 1.0
        x = int(np.searchsorted(pi_cum, u[0], side="right"))
    else:
        x = int(start)
    out[0] = x
    for t in range(1, length):
        x = bisect.bisect_right(cols[x], u[t])
        out[t] = x
    return out


def empirical_transition(traj: np.ndarray, n_states: int, d: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """d-step transition frequencies from a trajectory subsampled at stride ``d``.

    Returns ``(freq, counts)`` with ``freq[m, n]`` the fraction of visits to
    ``n`` followed by ``m`` and ``counts[n]`` the number of visits to ``n``.
    Subsampling makes consecutive pairs independent given the start state.
    """
    sub = np.asarray(traj)[::d]
    pairs = np.zeros((n_states, n_states))
    np.add.at(pairs, (sub[1:], sub[:-1]), 1.0)
    counts = pairs.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        freq = np.where(counts > 0, pairs / counts, 0.0)
    return freq, counts


@dataclass(eq=False)
class SimResult:
    """Outcome of one simulated trajectory.

    ``credited_rate`` averages the selected sum rate in every slot;
    ``delivered_rate`` counts a slot in outage as zero.
    """

    policy: str
    horizon: int
    seed: int
    credited_rate: float
    credited_stderr: float
    delivered_rate: float
    delivered_stderr: float
    outage_events: int
    analytic_rate: float
    initial_state: int
    combo_visits: np.ndarray = field(repr=False)
    combo_outages: np.ndarray = field(repr=False)
    trajectories: np.ndarray | None = field(default=None, repr=False)

    @property
    def outage_rate(self) -> float:
        return self.outage_events / self.horizon

    def outage_sigma(self, eps: float) -> float:
        """Binomial standard deviation of the outage frequency when the true rate is ``eps``."""
        return float(np.sqrt(eps * (1.0 - eps) / self.horizon))

    def combo_excess(self, eps: float, n_sigma: float = 3.0) -> np.ndarray:
        """Delayed states whose outage frequency exceeds ``eps`` by more than ``n_sigma`` binomial sigmas."""
        seen = self.combo_visits > 0
        freq = np.zeros_like(self.combo_visits, dtype=float)
        freq[seen] = self.combo_outages[seen] / self.combo_visits[seen]
        sigma = np.zeros_like(freq)
        sigma[seen] = np.sqrt(eps * (1.0 - eps) / self.combo_visits[seen])
        return np.flatnonzero(seen & (freq > eps + n_sigma * sigma))

    def within(self, n_sigma: float = 3.0) -> bool:
        # the floor absorbs summation rounding when every slot carries the same rate
        floor = 1e-12 * max(1.0, abs(self.analytic_rate))
        return abs(self.credited_rate - self.analytic_rate) <= n_sigma * self.credited_stderr + floor


def _batch_stderr(x: np.ndarray, batches: int = NUM_BATCHES) -> float:
    usable = (x.size // batches) * batches
    if usable == 0:
        return float("nan")
    means = x[:usable].reshape(batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(batches))


def simulate_states(scn: Scenario, length: int, seed: int) -> np.ndarray:
    """Joint state trajectory ``(length, num_processes)``, one RNG stream per process."""
    space = scn.space
    streams = np.random.SeedSequence(seed).spawn(space.num_processes)
    return np.stack([sample_chain(chain, length, np.random.default_rng(ss))
                     for chain, ss in zip(space.chains(), streams)], axis=1)


def outage_flags(scn: Scenario, policy: RatePolicy, current: np.ndarray, rates: np.ndarray,
                 tol: float = MEMBERSHIP_TOL) -> np.ndarray:
    """Per-slot outage indicator for rate rows ``rates`` at flat current states ``current``."""
    if policy.decoding == "tin":
        return np.any(rates > scn.tin_rates[current] + tol, axis=1)
    sums = rates @ scn.subset_matrix.T
    return np.any(sums > scn.bounds[current] + tol, axis=1)


def user_outages(scn: Scenario, policy: RatePolicy, states: np.ndarray,
                 tol: float = MEMBERSHIP_TOL) -> np.ndarray:
    """Per-user outage flags ``(T, K)`` of an interference-as-noise policy over a kept trajectory."""
    if policy.decoding != "tin":
        raise ValueError("per-user outage is only defined for interference-as-noise decoding")
    flat = scn.space.flat(states)
    burn = policy.delay
    rates = policy.rates[flat[:flat.size - burn]]
    return rates > scn.tin_rates[flat[burn:]] + tol


def run(scn: Scenario, policy: RatePolicy, horizon: int, seed: int,
        trace: str | Path | None = None, keep_states: bool = False,
        tol: float = MEMBERSHIP_TOL) -> SimResult:
    """Simulate ``horizon`` scored slots after a burn-in of ``policy.delay`` slots."""
    burn = policy.delay
    if horizon < 1:
        raise HorizonError(f"horizon must be at least 1 slot, got {horizon}")
    if policy.rates.shape != (scn.space.size, scn.k):
        raise ValueError("policy table does not match the scenario's state space")
    states = simulate_states(scn, horizon + burn, seed)
    flat = scn.space.flat(states)
    delayed = flat[:horizon]
    current = flat[burn:]
    rates = policy.rates[delayed]
    out = outage_flags(scn, policy, current, rates, tol)
    credited = rates.sum(axis=1)
    delivered = np.where(out, 0.0, credited)

    size = scn.space.size
    visits = np.bincount(delayed, minlength=size)
    outages = np.bincount(delayed, weights=out.astype(float), minlength=size)

    if trace is not None:
        write_trace(trace, states[burn:], rates, out)

    return SimResult(
        policy=policy.name, horizon=horizon, seed=seed,
        credited_rate=float(credited.mean()), credited_stderr=_batch_stderr(credited),
        delivered_rate=float(delivered.mean()), delivered_stderr=_batch_stderr(delivered),
        outage_events=int(out.sum()), analytic_rate=policy.analytic_sum_rate,
        initial_state=int(flat[0]), combo_visits=visits, combo_outages=outages,
        trajectories=states if keep_states else None)


def write_trace(path: str | Path, states: np.ndarray, rates: np.ndarray, outage: np.ndarray) -> None:
    """Per-slot log: slot index, process states, selected rates and outage flag."""
    n_proc, k = states.shape[1], rates.shape[1]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slot"] + [f"s{p}" for p in range(n_proc)] + [f"r{j}" for j in range(k)] + ["outage"])
        for t in range(states.shape[0]):
            w.writerow([t] + states[t].tolist() + [f"{r:.10g}" for r in rates[t]] + [int(outage[t])])


def chi_square_independence(a: np.ndarray, b: np.ndarray) -> tuple[float, int]:
    """Pearson statistic and degrees of freedom for two binary outage sequences."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    table = np.array([[np.sum(~a & ~b), np.sum(~a & b)], [np.sum(a & ~b), np.sum(a & b)]], dtype=float)
    expected = table.sum(axis=1, keepdims=True) * table.sum(axis=0, keepdims=True) / table.sum()
    mask = expected > 0
    stat = float(np.sum((table[mask] - expected[mask]) ** 2 / expected[mask]))
    return stat, 1
