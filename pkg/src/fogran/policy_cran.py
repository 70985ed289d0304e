"""C-RAN: the cloud picks all rates from global CSI that is ``d_e + d_c`` slots
old and decodes jointly.

Two routes are provided: the closed-form rule for two users with a fixed
direct gain and binary cross gains, and the general program that maximizes
the sum rate inside the outage region of each delayed joint state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .capacity import CapacityOracle, ChannelStateTuple
from .fsmc import MarkovChannelSpec, d_step
from .lp import LinearProgram, polish_feasible, solve_max
from .outage_region import eps_bar_for, percentile_lattice
from .scenario import RatePolicy, Scenario

L, H = 0, 1
_NAMES = {"L": L, "H": H, L: L, H: H}


@dataclass(frozen=True)
class TwoUserBinarySpec:
    """Two users, fixed direct gain ``S``, cross gains switching between ``I_L`` and ``I_H``.

    ``p = Pr[H | L]`` and ``q = Pr[L | H]`` for one slot; ``d`` is the CSI age
    used by the closed-form rules.  The capacities are sum capacities at
    ``(I_1, I_2) = (x, y)`` with both receive antennas.  ``mc_stderr`` is the
    largest Monte Carlo standard error reported for them and ``mc_tolerance``
    the slack allowed when checking that they are nested.
    """

    S: float
    I_L: float
    I_H: float
    p: float
    q: float
    d: int
    C_LL: float
    C_LH: float
    C_HH: float
    mc_tolerance: float = 0.0
    mc_stderr: float = 0.0

    def __post_init__(self):
        if not (0 < self.I_L <= self.I_H):
            raise ValueError("need 0 < I_L <= I_H")
        tol = self.mc_tolerance
        if not (self.C_LL <= self.C_LH + tol and self.C_LH <= self.C_HH + tol):
            raise ValueError(
                f"capacities not nested: C_LL={self.C_LL}, C_LH={self.C_LH}, C_HH={self.C_HH}")

    @classmethod
    def from_oracle(cls, S: float, I_L: float, I_H: float, p: float, q: float, d: int,
                    oracle: CapacityOracle) -> "TwoUserBinarySpec":
        if oracle.k != 2 or oracle.antenna_mode != "full":
            raise ValueError("two-user closed forms need a K=2 full-antenna oracle")
        caps, errs = [], []
        for a, b in ((I_L, I_L), (I_L, I_H), (I_H, I_H)):
            v, e = oracle.estimate((0, 1), ChannelStateTuple((S, S), ((a,), (b,))))
            caps.append(v)
            errs.append(e)
        return cls(S, I_L, I_H, p, q, d, *caps, mc_tolerance=2.0 * float(np.hypot(*errs[:2])),
                   mc_stderr=float(max(errs)))

    @property
    def single_bound(self) -> float:
        return float(np.log2(1.0 + self.S + self.I_L))

    @cached_property
    def chain(self) -> MarkovChannelSpec:
        if self.I_L == self.I_H:
            raise ValueError("degenerate chain: I_L == I_H")
        return MarkovChannelSpec.two_state(self.I_L, self.I_H, self.p, self.q)

    @property
    def pi_L(self) -> float:
        return self.q / (self.p + self.q)

    @property
    def pi_H(self) -> float:
        return self.p / (self.p + self.q)

    def beta(self, d: int) -> np.ndarray:
        """``beta[a, x] = Pr[I(t) = a | I(t - d) = x]`` for the binary chain."""
        T = np.array([[1.0 - self.p, self.q], [self.p, 1.0 - self.q]])
        return np.linalg.matrix_power(T, d)

    def capacity(self, a: int, b: int) -> float:
        if a == L and b == L:
            return self.C_LL
        if a == H and b == H:
            return self.C_HH
        return self.C_LH


def transition_probs(spec: TwoUserBinarySpec, pair, d: int | None = None) -> dict[str, float]:
    """``P[ab]``: probability of current ``(a, b)`` given delayed ``pair``."""
    x, y = (_NAMES[v] for v in pair)
    beta = spec.beta(spec.d if d is None else d)
    return {f"{na}{nb}": beta[a, x] * beta[b, y]
            for na, a in (("L", L), ("H", H)) for nb, b in (("L", L), ("H", H))}


def cran_two_user_choice(spec: TwoUserBinarySpec, pair, eps: float) -> tuple[str, tuple[float, float]]:
    """Branch label (A, B, C, D, E', E'') and the rate pair for delayed cross states ``pair``."""
    P = transition_probs(spec, pair)
    sb = spec.single_bound
    if eps <= P["LL"]:
        return "A", (spec.C_LL / 2, spec.C_LL / 2)
    if eps > 1.0 - P["HH"]:
        return "B", (spec.C_HH / 2, spec.C_HH / 2)
    if spec.C_LH <= 2 * sb:
        return "C", (spec.C_LH / 2, spec.C_LH / 2)
    p_tilde = min(P["LH"], P["HL"]) + P["LL"]
    if eps <= p_tilde:
        return "D", (sb, sb)
    # user 1 takes the large rate only when that orientation is strictly safer
    if P["HL"] + P["LL"] < P["LH"] + P["LL"]:
        return "E'", (spec.C_LH - sb, sb)
    return "E''", (sb, spec.C_LH - sb)


def cran_two_user_rates(spec: TwoUserBinarySpec, pair, eps: float) -> tuple[float, float]:
    return cran_two_user_choice(spec, pair, eps)[1]


def cran_two_user_sum_rate(spec: TwoUserBinarySpec, eps: float) -> float:
    pi = (spec.pi_L, spec.pi_H)
    return float(sum(pi[x] * pi[y] * sum(cran_two_user_rates(spec, (x, y), eps))
                     for x in (L, H) for y in (L, H)))


def cran_closed_policy(scn: Scenario, spec: TwoUserBinarySpec) -> RatePolicy:
    """Closed-form two-user rule laid out over the scenario's joint states."""
    _check_binary(scn)
    idx = scn.space.indices
    rates = np.array([cran_two_user_rates(spec, (row[2], row[3]), scn.eps) for row in idx])
    return RatePolicy("C-RAN (closed form)", scn.d_cloud, rates, "joint", scn.space.weights)


def _check_binary(scn: Scenario) -> None:
    if scn.k != 2 or scn.direct.num_states != 1 or scn.cross.num_states != 2:
        raise ValueError("closed forms need K=2, one direct state and two cross states")


def binary_spec_for(scn: Scenario, d: int) -> TwoUserBinarySpec:
    """Closed-form parameters matching a K=2, N_S=1, N_I=2 scenario."""
    _check_binary(scn)
    T = scn.cross.transition
    return TwoUserBinarySpec.from_oracle(float(scn.direct.levels[0]), float(scn.cross.levels[0]),
                                         float(scn.cross.levels[1]), float(T[1, 0]),
                                         float(T[0, 1]), d, scn.oracle)


def max_sum_in_region(bounds: np.ndarray, subset_matrix: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest sum rate inside one polymatroid-like region, with a maximizing rate vector."""
    lp = LinearProgram(np.ones(subset_matrix.shape[1]), subset_matrix, np.clip(bounds, 0.0, None))
    res = solve_max(lp, method="simplex")
    x = polish_feasible(subset_matrix, lp.b, res.x)
    return float(x.sum()), x


def cran_lp_policy(scn: Scenario) -> RatePolicy:
    """Per delayed joint state, the sum-rate maximizer inside its outage region."""
    space = scn.space
    eps_bar = eps_bar_for("C", scn.k, scn.eps)
    pct = percentile_lattice(space, scn.d_cloud, eps_bar)
    pct_flat = space.flat(pct)
    uniq, inverse = np.unique(pct_flat, return_inverse=True)
    bounds = scn.bounds[uniq]
    sol = np.empty((uniq.size, scn.k))
    memo: dict[tuple, np.ndarray] = {}
    for u, b in enumerate(bounds):
        key = tuple(b.tolist())
        if key not in memo:
            memo[key] = max_sum_in_region(b, scn.subset_matrix)[1]
        sol[u] = memo[key]
    return RatePolicy("C-RAN", scn.d_cloud, sol[inverse], "joint", space.weights)


def cran_lp_sum_rate(scn: Scenario) -> float:
    return cran_lp_policy(scn).analytic_sum_rate
