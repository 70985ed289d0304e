"""F-RAN: each RRS picks its user's rate from local CSI ``d_e`` slots old while
the cloud decodes all users jointly.

The two-user closed form works with zero-outage base rates ``R_L``, ``R_H``
and a per-observation threshold rule.  The general program couples every
user's local rate table through the outage regions of all joint states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .lp import LinearProgram, polish_feasible, solve_max
from .outage_region import eps_bar_for, percentile_maps
from .policy_cran import H, L, TwoUserBinarySpec, _check_binary
from .scenario import RatePolicy, Scenario

MAX_CONSTRAINTS = 10**6


@dataclass(frozen=True)
class FranTwoUserRates:
    """Zero-outage base rates for a current local cross state of ``L`` or ``H``."""

    R_L: float
    R_H: float
    case: int


def fran_two_user_base_rates(spec: TwoUserBinarySpec) -> FranTwoUserRates:
    sb = spec.single_bound
    half = spec.C_LL / 2
    if spec.C_LH > half + sb:
        return FranTwoUserRates(half, sb, 1)
    if spec.pi_L**2 > spec.pi_H**2:
        return FranTwoUserRates(half, spec.C_LH - half, 2)
    return FranTwoUserRates(spec.C_LH - sb, sb, 3)


def fran_base_objective(spec: TwoUserBinarySpec, r_low) -> np.ndarray:
    """Average zero-outage sum rate as a function of ``R_L`` (``R_H`` set to its largest safe value)."""
    r_low = np.asarray(r_low, dtype=float)
    pl, ph = spec.pi_L, spec.pi_H
    r_high = np.minimum(spec.C_LH - r_low, spec.single_bound)
    return 2 * (pl**2 + pl * ph) * r_low + 2 * (pl * ph + ph**2) * r_high


def fran_two_user_selection(spec: TwoUserBinarySpec, d_e: int, eps: float) -> tuple[float, float]:
    """Rate chosen after observing local state ``L`` and after observing ``H``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps!r}")
    base = fran_two_user_base_rates(spec)
    eps_bar = eps_bar_for("F", 2, eps)
    beta = spec.beta(d_e)
    return tuple(base.R_L if eps_bar <= beta[L, x] else base.R_H for x in (L, H))


def fran_two_user_sum_rate(spec: TwoUserBinarySpec, d_e: int, eps: float) -> float:
    r = fran_two_user_selection(spec, d_e, eps)
    return float(2 * (spec.pi_L * r[L] + spec.pi_H * r[H]))


def fran_closed_policy(scn: Scenario, spec: TwoUserBinarySpec) -> RatePolicy:
    _check_binary(scn)
    r = fran_two_user_selection(spec, scn.d_e, scn.eps)
    idx = scn.space.indices
    # RRS 1 observes I_12 (process 2), RRS 2 observes I_21 (process 3)
    rates = np.stack([np.take(r, idx[:, 2]), np.take(r, idx[:, 3])], axis=1)
    return RatePolicy("F-RAN (closed form)", scn.d_e, rates, "joint", scn.space.weights)


def fran_eps_bar(scn: Scenario) -> float:
    if scn.fran_exponent == "1/K^2":
        return eps_bar_for("C", scn.k, scn.eps)
    return eps_bar_for("F", scn.k, scn.eps)


@dataclass(eq=False)
class FranLpProblem:
    """Coupled program over per-user local rate tables.

    Variable ``offsets[j] + s`` is the rate of user ``j`` for local percentile
    signature ``s``.  Each row of ``A`` sums the rates of one subset under one
    combination of signatures and is bounded by the region of the matching
    percentile joint state.
    """

    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    offsets: np.ndarray
    user_sig: np.ndarray  # (size, K) signature of each user in every delayed joint state

    @property
    def num_constraints(self) -> int:
        return self.A.shape[0]


def _signatures(pct_idx: np.ndarray, space, j: int, n_s: int, n_i: int) -> np.ndarray:
    cols = space.local_processes(j)
    return np.ravel_multi_index(tuple(pct_idx[:, c] for c in cols),
                                (n_s,) + (n_i,) * (space.k - 1))


def build_fran_lp(scn: Scenario, max_constraints: int = MAX_CONSTRAINTS) -> FranLpProblem:
    space = scn.space
    k = scn.k
    n_s, n_i = scn.direct.num_states, scn.cross.num_states
    eps_bar = fran_eps_bar(scn)
    pct_s, pct_i = percentile_maps(scn.direct, scn.cross, scn.d_e, eps_bar)

    # percentile image of each process and the stationary mass mapped onto it
    img_s, img_i = np.unique(pct_s), np.unique(pct_i)
    mass_s = np.bincount(pct_s, weights=scn.direct.stationary, minlength=n_s)
    mass_i = np.bincount(pct_i, weights=scn.cross.stationary, minlength=n_i)

    # every joint state whose coordinates all lie in the images is a percentile state
    img_shape = (img_s.size,) * k + (img_i.size,) * (k * (k - 1))
    n_pct = int(np.prod(img_shape, dtype=np.int64))
    n_sub = len(scn.subset_list)
    if n_pct * n_sub > max_constraints * 8:
        raise ValueError(f"{n_pct} percentile states x {n_sub} subsets is too large to enumerate")
    grid = np.indices(img_shape).reshape(len(img_shape), -1).T
    pct_idx = np.empty_like(grid)
    pct_idx[:, :k] = img_s[grid[:, :k]]
    pct_idx[:, k:] = img_i[grid[:, k:]]
    bounds = scn.bounds[space.flat(pct_idx)]

    n_local = n_s * n_i ** (k - 1)
    offsets = np.arange(k) * n_local
    sig = np.stack([_signatures(pct_idx, space, j, n_s, n_i) for j in range(k)], axis=1)

    # objective weight of a signature: stationary mass of the local combos mapped onto it
    local_w = mass_s
    for _ in range(k - 1):
        local_w = np.kron(local_w, mass_i)
    c = np.tile(local_w, k)

    rows, cols, rhs = [], [], []
    n_rows = 0
    for r, subset in enumerate(scn.subset_list):
        var = sig[:, list(subset)] + offsets[list(subset)]
        # identical variable tuples give identical rows; keep the tightest bound
        uniq, inv = np.unique(var, axis=0, return_inverse=True)
        inv = inv.ravel()
        tight = np.full(uniq.shape[0], np.inf)
        np.minimum.at(tight, inv, bounds[:, r])
        m = uniq.shape[0]
        rows.append(np.repeat(np.arange(n_rows, n_rows + m), len(subset)))
        cols.append(uniq.ravel())
        rhs.append(tight)
        n_rows += m
    if n_rows > max_constraints:
        raise ValueError(f"{n_rows} deduplicated constraints exceed the cap of {max_constraints}")
    A = sp.csr_matrix((np.ones(sum(x.size for x in rows)),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n_rows, k * n_local))
    b = np.clip(np.concatenate(rhs), 0.0, None)

    full_pct = np.empty_like(space.indices)
    full_pct[:, :k] = pct_s[space.indices[:, :k]]
    full_pct[:, k:] = pct_i[space.indices[:, k:]]
    user_sig = np.stack([_signatures(full_pct, space, j, n_s, n_i) for j in range(k)], axis=1)
    return FranLpProblem(c, A, b, offsets, user_sig)


def solve_fran_lp(problem: FranLpProblem, method: str = "auto") -> np.ndarray:
    """Optimal rate table, one entry per (user, signature), exactly feasible."""
    lp = LinearProgram(problem.c, problem.A, problem.b)
    res = solve_max(lp, method=method)
    return polish_feasible(problem.A, problem.b, res.x)


def fran_lp_policy(scn: Scenario, method: str = "auto") -> RatePolicy:
    problem = build_fran_lp(scn)
    x = solve_fran_lp(problem, method)
    rates = x[problem.user_sig + problem.offsets]
    return RatePolicy("F-RAN", scn.d_e, rates, "joint", scn.space.weights)


def fran_lp_sum_rate(scn: Scenario, method: str = "auto") -> float:
    return fran_lp_policy(scn, method).analytic_sum_rate
