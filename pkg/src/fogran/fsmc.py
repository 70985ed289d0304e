"""Finite-state Markov models of Rayleigh fading power.

Fading power is quantized into ``N`` equal-probability cells and the cell
index evolves as a first-order Markov chain whose neighbour transitions are
driven by the level-crossing rate of Clarke's model.

Transition matrices follow the column convention ``T[m, n] = Pr[m | n]``,
so every column sums to one and ``T^d`` holds the ``d``-step conditional
probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.sparse.csgraph import connected_components

SPEED_OF_LIGHT = 3e8  # m/s
PROB_ATOL = 1e-12

ChannelKind = Literal["direct", "cross"]


class FsmcError(ValueError):
    """Raised when a chain cannot be built or is not usable."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def kmh_to_ms(v_kmh: float) -> float:
    return v_kmh / 3.6


@dataclass(frozen=True)
class ClarkeParams:
    """Physical parameters of one fading process (all linear / SI units)."""

    avg_snr: float
    velocity: float
    wavelength: float
    slot_duration: float
    num_states: int

    def __post_init__(self):
        for name in ("avg_snr", "wavelength", "slot_duration"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise FsmcError(f"{name} must be positive and finite, got {value!r}")
        # zero velocity is allowed: the chain freezes into the identity
        if not (self.velocity >= 0 and math.isfinite(self.velocity)):
            raise FsmcError(f"velocity must be non-negative and finite, got {self.velocity!r}")
        if int(self.num_states) != self.num_states or self.num_states < 1:
            raise FsmcError(f"num_states must be a positive integer, got {self.num_states!r}")

    @property
    def doppler(self) -> float:
        return self.velocity / self.wavelength


@dataclass(frozen=True, eq=False)
class MarkovChannelSpec:
    """Quantized fading process: levels, transition matrix and stationary law."""

    levels: np.ndarray
    transition: np.ndarray
    stationary: np.ndarray
    kind: ChannelKind = "direct"

    def __post_init__(self):
        levels = np.array(self.levels, dtype=float)
        T = np.array(self.transition, dtype=float)
        pi = np.array(self.stationary, dtype=float)
        n = levels.size
        if levels.ndim != 1 or n < 1:
            raise FsmcError("levels must be a non-empty vector")
        if np.any(levels <= 0) or np.any(np.diff(levels) <= 0):
            raise FsmcError("levels must be positive and strictly increasing")
        if T.shape != (n, n) or pi.shape != (n,):
            raise FsmcError("transition/stationary shapes do not match the number of levels")
        _check_stochastic(T)
        m, k = np.nonzero(T)
        if np.any(np.abs(m - k) > 1):
            raise FsmcError("transition matrix must be tridiagonal")
        if np.any(pi < -PROB_ATOL) or abs(pi.sum() - 1.0) > 1e-10:
            raise FsmcError("stationary vector is not a probability vector")
        if np.max(np.abs(T @ pi - pi)) > 1e-10:
            raise FsmcError("stationary vector is not a fixed point of the transition matrix")
        for arr in (levels, T, pi):
            arr.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "transition", T)
        object.__setattr__(self, "stationary", pi)

    @property
    def num_states(self) -> int:
        return self.levels.size

    @classmethod
    def from_transition(cls, levels, transition, kind: ChannelKind = "direct") -> "MarkovChannelSpec":
        """Build a chain from explicit levels and transitions, solving for the stationary law."""
        T = np.asarray(transition, dtype=float)
        _check_stochastic(T)
        return cls(levels, T, _solve_stationary(T), kind)

    @classmethod
    def two_state(cls, low: float, high: float, p: float, q: float,
                  kind: ChannelKind = "cross") -> "MarkovChannelSpec":
        """Binary chain with ``p = Pr[H | L]`` and ``q = Pr[L | H]``."""
        T = np.array([[1.0 - p, q], [p, 1.0 - q]])
        return cls.from_transition([low, high], T, kind)


def _check_stochastic(T: np.ndarray) -> None:
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise FsmcError("transition matrix must be square")
    bad = np.argwhere((T < -PROB_ATOL) | (T > 1 + PROB_ATOL))
    if bad.size:
        m, n = bad[0]
        raise FsmcError(f"transition entry p[{m},{n}] = {T[m, n]!r} outside [0, 1]")
    col = T.sum(axis=0)
    if np.max(np.abs(col - 1.0)) > PROB_ATOL:
        n = int(np.argmax(np.abs(col - 1.0)))
        raise FsmcError(f"column {n} of the transition matrix sums to {col[n]!r}")


def _solve_stationary(T: np.ndarray) -> np.ndarray:
    n = T.shape[0]
    ncomp, _ = connected_components(T > 0, directed=True, connection="strong")
    if ncomp > 1:
        raise FsmcError(f"chain is reducible ({ncomp} communicating classes); stationary law not unique")
    A = T - np.eye(n)
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = np.linalg.solve(A, rhs)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def quantization_thresholds(avg_snr: float, num_states: int) -> np.ndarray:
    """Equal-probability cell edges of an exponential power law.

    Returns ``num_states + 1`` edges with the first at 0 and the last at inf.
    """
    m = np.arange(num_states + 1)
    with np.errstate(divide="ignore"):
        edges = -avg_snr * np.log1p(-m / num_states)
    edges[0] = 0.0
    edges[-1] = np.inf
    return edges


def quantization_levels(avg_snr: float, num_states: int) -> np.ndarray:
    """Representative power of each cell: the midpoint, or ``avg_snr + edge`` for the open top cell."""
    edges = quantization_thresholds(avg_snr, num_states)
    levels = 0.5 * (edges[:-1] + edges[1:])
    levels[-1] = avg_snr + edges[-2]
    return levels


def crossing_rate(threshold, avg_snr: float, doppler: float):
    """Level-crossing rate of Rayleigh power at ``threshold`` (crossings per second)."""
    rho = np.asarray(threshold, dtype=float) / avg_snr
    with np.errstate(invalid="ignore"):
        rate = np.sqrt(2.0 * np.pi * rho) * doppler * np.exp(-rho)
    return np.where(np.isfinite(rho), rate, 0.0)


def build_fsmc(params: ClarkeParams, kind: ChannelKind = "direct") -> MarkovChannelSpec:
    """Quantize Clarke's fading model into an equal-probability Markov chain."""
    n = int(params.num_states)
    levels = quantization_levels(params.avg_snr, n)
    if n == 1:
        return MarkovChannelSpec(levels, np.ones((1, 1)), np.ones(1), kind)

    edges = quantization_thresholds(params.avg_snr, n)
    # every cell has probability 1/n, so dividing by pi_n is multiplying by n
    flux = crossing_rate(edges[1:-1], params.avg_snr, params.doppler) * params.slot_duration * n
    T = np.zeros((n, n))
    idx = np.arange(n - 1)
    T[idx + 1, idx] = flux  # up from cell k across edge k+1
    T[idx, idx + 1] = flux  # down from cell k+1 across the same edge
    for k in range(n):
        for m in (k - 1, k + 1):
            if 0 <= m < n and T[m, k] > 1.0:
                raise FsmcError(
                    f"transition p[{m},{k}] = {T[m, k]:.4g} exceeds 1; "
                    "slot too long or velocity too high for this quantization")
    diag = 1.0 - T.sum(axis=0)
    bad = np.flatnonzero(diag < -PROB_ATOL)
    if bad.size:
        k = int(bad[0])
        raise FsmcError(
            f"transition p[{k},{k}] = {diag[k]:.4g} is negative; "
            "slot too long or velocity too high for this quantization")
    T[np.arange(n), np.arange(n)] = np.clip(diag, 0.0, None)
    return MarkovChannelSpec(levels, T, np.full(n, 1.0 / n), kind)


def d_step(spec: MarkovChannelSpec, d: int) -> np.ndarray:
    """``T^d``; entry ``(m, n)`` is ``Pr[state m at t | state n at t - d]``."""
    if d < 0 or int(d) != d:
        raise FsmcError(f"delay must be a non-negative integer, got {d!r}")
    T = spec.transition
    out = np.eye(spec.num_states)
    for _ in range(int(d)):
        out = T @ out
    return out


def stationary(spec: MarkovChannelSpec) -> np.ndarray:
    """Unique stationary law of ``spec.transition``."""
    return _solve_stationary(spec.transition)


def percentile_indices(cond: np.ndarray, eps: float) -> np.ndarray:
    """Percentile state for every starting state of a conditional matrix.

    ``cond[m, n]`` is the probability of landing in ``m`` from ``n``.  The
    result for column ``n`` is the highest ``m`` whose mass strictly below
    ``m`` is at most ``eps``, so that ``Pr[state < result] <= eps``.
    """
    below = np.zeros_like(cond)
    below[1:] = np.cumsum(cond[:-1], axis=0)
    ok = below <= eps
    n_states = cond.shape[0]
    # highest qualifying row; row 0 always qualifies since nothing lies below it
    last = n_states - 1 - np.argmax(ok[::-1, :], axis=0)
    return np.where(ok.any(axis=0), last, 0)


def percentile_state(spec: MarkovChannelSpec, from_state: int, d: int, eps: float) -> int:
    """Conservative ``eps``-percentile of the ``d``-step law started at ``from_state``."""
    if not 0.0 <= eps <= 1.0:
        raise FsmcError(f"eps must lie in [0, 1], got {eps!r}")
    cond = d_step(spec, d)[:, [from_state]]
    return int(percentile_indices(cond, eps)[0])
