"""Indexing of joint channel states for K user/RRS pairs.

A joint state holds one index per fading process: the K direct processes
first, then the K(K-1) cross processes ``(j, i)`` (RRS ``j`` hearing UE
``i``) in row-major order.  Flattened indices follow ``np.ravel_multi_index``
over that process order.
"""

from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np

from .fsmc import MarkovChannelSpec

MAX_STATES = 10**6


def subsets(k: int) -> list[tuple[int, ...]]:
    """Nonempty subsets of ``range(k)`` ordered by bitmask."""
    return [tuple(j for j in range(k) if mask >> j & 1) for mask in range(1, 2**k)]


def cross_pairs(k: int) -> list[tuple[int, int]]:
    return [(j, i) for j in range(k) for i in range(k) if i != j]


class StateSpace:
    """Joint state lattice of ``k`` direct and ``k(k-1)`` cross processes."""

    def __init__(self, k: int, direct: MarkovChannelSpec, cross: MarkovChannelSpec,
                 max_states: int = MAX_STATES):
        if k < 1:
            raise ValueError("need at least one user")
        self.k = k
        self.direct = direct
        self.cross = cross
        self.pairs = cross_pairs(k)
        self.shape = (direct.num_states,) * k + (cross.num_states,) * len(self.pairs)
        self.size = int(np.prod(self.shape, dtype=np.int64))
        if self.size > max_states:
            raise ValueError(
                f"joint state space has {self.size} states, above the cap of {max_states}")

    @property
    def num_processes(self) -> int:
        return len(self.shape)

    def chains(self) -> list[MarkovChannelSpec]:
        return [self.direct] * self.k + [self.cross] * len(self.pairs)

    @cached_property
    def indices(self) -> np.ndarray:
        """All joint states as an ``(size, num_processes)`` index array."""
        grids = np.indices(self.shape).reshape(len(self.shape), -1)
        return np.ascontiguousarray(grids.T)

    def flat(self, idx: np.ndarray) -> np.ndarray:
        idx = np.asarray(idx)
        return np.ravel_multi_index(tuple(idx[..., p] for p in range(self.num_processes)), self.shape)

    def gains(self, idx: np.ndarray | None = None) -> np.ndarray:
        """Gain matrices ``G[j, i]`` (power at RRS j from UE i) for index rows."""
        idx = self.indices if idx is None else np.atleast_2d(idx)
        g = np.empty((idx.shape[0], self.k, self.k))
        for j in range(self.k):
            g[:, j, j] = self.direct.levels[idx[:, j]]
        for p, (j, i) in enumerate(self.pairs):
            g[:, j, i] = self.cross.levels[idx[:, self.k + p]]
        return g

    @cached_property
    def weights(self) -> np.ndarray:
        """Stationary probability of every joint state (product law)."""
        w = np.ones(self.size)
        for p, chain in enumerate(self.chains()):
            w *= chain.stationary[self.indices[:, p]]
        return w

    def local_processes(self, j: int) -> list[int]:
        """Process columns observed locally at RRS ``j``: its direct link and incoming cross links."""
        return [j] + [self.k + p for p, (r, _) in enumerate(self.pairs) if r == j]

    def local_shape(self) -> tuple[int, ...]:
        return (self.direct.num_states,) + (self.cross.num_states,) * (self.k - 1)


def iter_local_states(shape: tuple[int, ...]):
    return itertools.product(*(range(n) for n in shape))
