"""Ergodic multiple-access sum capacities and capacity regions.

The sum capacity of a user subset is ``E[log2 det(I + H H^H)]`` where the
entries of ``H`` carry fixed powers and independent uniform phases.  It is
estimated by Monte Carlo over the phases.  The phase draws are shared by all
channel states of the same matrix shape and are symmetrized over row and
column permutations and conjugation, so the estimates are exactly invariant
under user relabelling and vary smoothly between neighbouring states.
"""

from __future__ import annotations

import itertools
import json
import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .lattice import subsets

AntennaMode = Literal["restricted", "full"]
MAX_USERS = 4
DEFAULT_SAMPLES = 200_000
_CHUNK_ELEMS = 4_000_000


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelStateTuple:
    """Current fading powers: ``direct[j] = S_j``, ``cross[j]`` lists ``I_ji`` for ``i != j``."""

    direct: tuple[float, ...]
    cross: tuple[tuple[float, ...], ...]

    @property
    def k(self) -> int:
        return len(self.direct)

    def gain_matrix(self) -> np.ndarray:
        k = self.k
        g = np.diag(np.asarray(self.direct, dtype=float))
        for j in range(k):
            others = [i for i in range(k) if i != j]
            for i, val in zip(others, self.cross[j]):
                g[j, i] = val
        return g

    @classmethod
    def from_gain_matrix(cls, g) -> "ChannelStateTuple":
        g = np.asarray(g, dtype=float)
        k = g.shape[0]
        return cls(tuple(float(x) for x in np.diag(g)),
                   tuple(tuple(float(g[j, i]) for i in range(k) if i != j) for j in range(k)))


@dataclass(frozen=True)
class CapacityRegion:
    """Sum-rate bounds for every nonempty user subset."""

    bounds: dict

    @property
    def k(self) -> int:
        return max(max(s) for s in self.bounds) + 1

    def contains(self, rates: Sequence[float], tol: float = 1e-9) -> bool:
        r = np.asarray(rates, dtype=float)
        return all(r[list(s)].sum() <= b + tol for s, b in self.bounds.items())


def contains(region: CapacityRegion, rates: Sequence[float], tol: float = 1e-9) -> bool:
    return region.contains(rates, tol)


def _rows_for(subset: tuple[int, ...], k: int, mode: AntennaMode) -> list[int]:
    if mode == "restricted":
        return list(subset)
    if mode == "full":
        return list(range(k))
    raise CapacityError(f"unknown antenna mode {mode!r}")


class CapacityOracle:
    """Cached Monte Carlo estimator of ergodic sum capacities.

    Estimates are keyed by the canonical form of the relevant gain submatrix
    (rows = receiving RRSs, columns = the subset's UEs), so restricted and
    full modes share entries whenever the submatrices coincide.
    """

    def __init__(self, k: int, antenna_mode: AntennaMode = "restricted",
                 mc_samples: int = DEFAULT_SAMPLES, seed: int = 0, max_users: int = MAX_USERS):
        if k < 1:
            raise CapacityError("need at least one user")
        if k > max_users:
            raise CapacityError(f"K={k} exceeds the supported maximum of {max_users} users")
        if mc_samples < 1:
            raise CapacityError("mc_samples must be positive")
        _rows_for((0,), k, antenna_mode)
        self.k = k
        self.antenna_mode = antenna_mode
        self.mc_samples = int(mc_samples)
        self.seed = int(seed)
        self._cache: dict[tuple, tuple[float, float]] = {}
        self._phases: dict[tuple[int, int], np.ndarray] = {}
        self._lock = threading.Lock()

    # -- sampling -----------------------------------------------------------

    def phases(self, rows: int, cols: int) -> np.ndarray:
        """Symmetrized phase draws of shape ``(n, rows, cols)``, shared by all states."""
        key = (rows, cols)
        with self._lock:
            if key in self._phases:
                return self._phases[key]
        row_perms = list(itertools.permutations(range(rows)))
        col_perms = list(itertools.permutations(range(cols)))
        group = 2 * len(row_perms) * len(col_perms)
        n0 = -(-self.mc_samples // group)
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, rows, cols]))
        base = rng.uniform(0.0, 2.0 * np.pi, size=(n0, rows, cols))
        blocks = []
        for rp in row_perms:
            for cp in col_perms:
                blk = base[:, rp, :][:, :, cp]
                blocks.append(blk)
                blocks.append(-blk)
        theta = np.concatenate(blocks, axis=0)
        with self._lock:
            self._phases.setdefault(key, theta)
        return self._phases[key]

    @property
    def cache_size(self) -> int:
        return len(self._cache)

    # -- keys -----------------------------------------------------------------

    @staticmethod
    def canonical_key(sub: np.ndarray) -> tuple:
        r, c = sub.shape
        best = None
        for rp in itertools.permutations(range(r)):
            for cp in itertools.permutations(range(c)):
                cand = tuple(sub[np.ix_(rp, cp)].ravel().tolist())
                if best is None or cand < best:
                    best = cand
        return (r, c, best)

    def _submatrices(self, subset: tuple[int, ...], gains: np.ndarray) -> np.ndarray:
        rows = _rows_for(subset, self.k, self.antenna_mode)
        return gains[:, rows, :][:, :, list(subset)]

    # -- estimation -----------------------------------------------------------

    def _estimate_batch(self, subs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Monte Carlo ``E log2 det(I + H^H H)`` for gain submatrices ``(M, r, l)``."""
        m, r, l = subs.shape
        if l == 1:
            # rank-one: det(I + h h^H) = 1 + |h|^2 regardless of phases
            return np.log2(1.0 + subs[:, :, 0].sum(axis=1)), np.zeros(m)
        theta = self.phases(r, l)
        n = theta.shape[0]
        means = np.empty(m)
        errs = np.empty(m)
        if l == 2:
            amp = np.sqrt(subs[:, :, 0] * subs[:, :, 1])               # (M, r)
            rot = np.exp(1j * (theta[:, :, 1] - theta[:, :, 0])).T     # (r, n)
            a = subs[:, :, 0].sum(axis=1)
            b = subs[:, :, 1].sum(axis=1)
            base = (1.0 + a) * (1.0 + b)
            step = max(1, _CHUNK_ELEMS // n)
            for lo in range(0, m, step):
                hi = min(m, lo + step)
                cross = amp[lo:hi] @ rot
                det = base[lo:hi, None] - (cross.real**2 + cross.imag**2)
                vals = np.log2(det)
                means[lo:hi] = vals.mean(axis=1)
                errs[lo:hi] = vals.std(axis=1) / math.sqrt(n)
            return means, errs
        phase = np.exp(1j * theta)                                     # (n, r, l)
        eye = np.eye(l)
        for idx in range(m):
            h = np.sqrt(subs[idx])[None, :, :] * phase
            gram = np.conj(np.swapaxes(h, 1, 2)) @ h
            _, logdet = np.linalg.slogdet(eye + gram)
            vals = logdet / math.log(2.0)
            means[idx] = vals.mean()
            errs[idx] = vals.std() / math.sqrt(n)
        return means, errs

    def estimate_many(self, subset: Sequence[int], gains: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Sum capacity and standard error for ``subset`` at each gain matrix ``(M, K, K)``."""
        subset = tuple(sorted(subset))
        if not subset:
            raise CapacityError("subset must be nonempty")
        if subset[0] < 0 or subset[-1] >= self.k:
            raise CapacityError(f"subset {subset} out of range for K={self.k}")
        gains = np.asarray(gains, dtype=float)
        if gains.ndim == 2:
            gains = gains[None]
        subs = self._submatrices(subset, gains)
        keys = [self.canonical_key(s) for s in subs]
        missing = {}
        with self._lock:
            for key in keys:
                if key not in self._cache and key not in missing:
                    missing[key] = len(missing)
        if missing:
            order = list(missing)
            mats = np.array([np.array(key[2]).reshape(key[0], key[1]) for key in order])
            vals, errs = self._estimate_batch(mats)
            with self._lock:
                for key, v, e in zip(order, vals, errs):
                    self._cache.setdefault(key, (float(v), float(e)))
        out = np.array([self._cache[key] for key in keys])
        return out[:, 0], out[:, 1]

    def estimate(self, subset: Sequence[int], state: ChannelStateTuple) -> tuple[float, float]:
        vals, errs = self.estimate_many(subset, state.gain_matrix())
        return float(vals[0]), float(errs[0])

    def ergodic_sum_capacity(self, subset: Sequence[int], state: ChannelStateTuple) -> float:
        return self.estimate(subset, state)[0]

    def region_table(self, gains: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Bounds for every subset (bitmask order) at each gain matrix: ``(M, 2^K - 1)``."""
        gains = np.asarray(gains, dtype=float)
        cols = [self.estimate_many(s, gains) for s in subsets(self.k)]
        return np.stack([c[0] for c in cols], axis=1), np.stack([c[1] for c in cols], axis=1)

    def capacity_region(self, state: ChannelStateTuple) -> CapacityRegion:
        if state.k != self.k:
            raise CapacityError(f"state has K={state.k}, oracle expects K={self.k}")
        g = state.gain_matrix()
        return CapacityRegion({s: self.ergodic_sum_capacity(s, ChannelStateTuple.from_gain_matrix(g))
                               for s in subsets(self.k)})

    # -- persistence ------------------------------------------------------------

    def save(self, path: str | Path) -> int:
        """Write cached estimates as JSON lines; returns the number of records."""
        path = Path(path)
        with self._lock:
            items = sorted(self._cache.items())
        with path.open("w") as fh:
            for (r, c, gains), (value, err) in items:
                fh.write(json.dumps({"seed": self.seed, "samples": self.mc_samples, "rows": r,
                                     "cols": c, "gains": list(gains), "value": value,
                                     "stderr": err}) + "\n")
        return len(items)

    def load(self, path: str | Path) -> int:
        """Merge records matching this oracle's seed and sample count; returns how many."""
        path = Path(path)
        if not path.exists():
            return 0
        count = 0
        with path.open() as fh, self._lock:
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                if rec["seed"] != self.seed or rec["samples"] != self.mc_samples:
                    continue
                key = (rec["rows"], rec["cols"], tuple(float(x) for x in rec["gains"]))
                self._cache[key] = (float(rec["value"]), float(rec["stderr"]))
                count += 1
        return count


def capacity_region(oracle: CapacityOracle, state: ChannelStateTuple) -> CapacityRegion:
    return oracle.capacity_region(state)


def ergodic_sum_capacity(oracle: CapacityOracle, subset: Sequence[int], state: ChannelStateTuple) -> float:
    return oracle.ergodic_sum_capacity(subset, state)
