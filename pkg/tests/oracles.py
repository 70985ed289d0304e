"""Independent reference computations used to check the package.

Each routine here takes a different route from the package code: exact
rational arithmetic, closed-form integrals, brute-force enumeration or
plain loops over explicit formulas.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy import stats


# -- fading chains ---------------------------------------------------------------

def naive_fsmc(avg_snr: float, velocity: float, wavelength: float, slot: float, n: int):
    """Levels and transitions from the exponential quantile function and a scalar loop."""
    fd = velocity / wavelength
    edges = [stats.expon.ppf(m / n, scale=avg_snr) for m in range(n)] + [math.inf]
    levels = []
    for m in range(n):
        if m == n - 1:
            levels.append(avg_snr + edges[m])
        else:
            levels.append((edges[m] + edges[m + 1]) / 2)

    def lcr(g):
        return math.sqrt(2 * math.pi * g / avg_snr) * fd * math.exp(-g / avg_snr)

    T = [[0.0] * n for _ in range(n)]
    for m in range(n - 1):
        # probability mass crossing edge m+1 per slot, divided by the cell probability 1/n
        p = lcr(edges[m + 1]) * slot / (1.0 / n)
        T[m + 1][m] = p
        T[m][m + 1] = p
    for m in range(n):
        T[m][m] = 1.0 - sum(T[r][m] for r in range(n) if r != m)
    return np.array(levels), np.array(T)


# -- capacity ---------------------------------------------------------------------

def exact_two_by_two_capacity(g) -> float:
    """E log2 det(I + H H^H) for a 2x2 H with powers ``g`` and independent uniform phases.

    det = 1 + sum(g) + |h11 h22 - h12 h21|^2 and the last term is
    g11 g22 + g12 g21 - 2 sqrt(g11 g22 g12 g21) cos(phi) with phi uniform, so
    the average of ln(A - B cos phi) is ln((A + sqrt(A^2 - B^2)) / 2).
    """
    g = np.asarray(g, dtype=float)
    A = 1.0 + g.sum() + g[0, 0] * g[1, 1] + g[0, 1] * g[1, 0]
    B = 2.0 * math.sqrt(g[0, 0] * g[1, 1] * g[0, 1] * g[1, 0])
    return math.log2((A + math.sqrt(A * A - B * B)) / 2.0)


def plain_mc_capacity(g, n: int, seed: int) -> tuple[float, float]:
    """Unsymmetrized Monte Carlo through eigenvalues of H^H H."""
    g = np.asarray(g, dtype=float)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, size=(n,) + g.shape)
    h = np.sqrt(g) * np.exp(1j * theta)
    eig = np.linalg.eigvalsh(np.conj(np.swapaxes(h, 1, 2)) @ h)
    vals = np.log2(1.0 + np.clip(eig, 0, None)).sum(axis=1)
    return float(vals.mean()), float(vals.std() / math.sqrt(n))


# -- linear programming -----------------------------------------------------------------

def fraction_simplex(c, A, b) -> Fraction:
    """max c.x s.t. A x <= b, x >= 0 (b >= 0) in exact rational arithmetic, Bland's rule."""
    m, n = len(A), len(c)
    rows = [[Fraction(v) for v in A[i]] + [Fraction(int(i == j)) for j in range(m)] + [Fraction(b[i])]
            for i in range(m)]
    z = [Fraction(-v) for v in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = [n + i for i in range(m)]
    while True:
        enter = next((j for j in range(n + m) if z[j] < 0), None)
        if enter is None:
            return z[-1]
        best = None
        for i in range(m):
            if rows[i][enter] > 0:
                ratio = rows[i][-1] / rows[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise ArithmeticError("unbounded")
        r = best[1]
        piv = rows[r][enter]
        rows[r] = [v / piv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [a - f * p for a, p in zip(rows[i], rows[r])]
        f = z[enter]
        z = [a - f * p for a, p in zip(z, rows[r])]
        basis[r] = enter


def vertex_max_sum(b1: float, b2: float, b12: float) -> float:
    """max x1 + x2 over {x >= 0, x1 <= b1, x2 <= b2, x1 + x2 <= b12} by vertex enumeration."""
    lines = [((1, 0), b1), ((0, 1), b2), ((1, 1), b12), ((1, 0), 0.0), ((0, 1), 0.0)]
    best = -math.inf
    for (a, p), (c, q) in itertools.combinations(lines, 2):
        det = a[0] * c[1] - a[1] * c[0]
        if det == 0:
            continue
        x = (p * c[1] - a[1] * q) / det
        y = (a[0] * q - p * c[0]) / det
        tol = 1e-12
        if x >= -tol and y >= -tol and x <= b1 + tol and y <= b2 + tol and x + y <= b12 + tol:
            best = max(best, x + y)
    return best


# -- two-user rate selection --------------------------------------------------------------

def pair_outage(rates, spec, pair, d) -> float:
    """Exact outage of a fixed rate pair given delayed cross states ``pair``."""
    T = np.linalg.matrix_power(np.array([[1 - spec.p, spec.q], [spec.p, 1 - spec.q]]), d)
    lv = (spec.I_L, spec.I_H)
    cap = {(0, 0): spec.C_LL, (0, 1): spec.C_LH, (1, 0): spec.C_LH, (1, 1): spec.C_HH}
    out = 0.0
    for a in (0, 1):
        for b in (0, 1):
            prob = T[a, pair[0]] * T[b, pair[1]]
            r1_max = math.log2(1 + spec.S + lv[b])  # user 1 is heard through I_21
            r2_max = math.log2(1 + spec.S + lv[a])
            ok = rates[0] <= r1_max + 1e-12 and rates[1] <= r2_max + 1e-12 and \
                rates[0] + rates[1] <= cap[(a, b)] + 1e-12
            if not ok:
                out += prob
    return out


def cran_candidate_search(spec, pair, eps) -> float:
    """Best sum over the candidate points whose exact outage is within ``eps``."""
    sb = spec.single_bound
    cands = [(spec.C_LL / 2, spec.C_LL / 2), (spec.C_HH / 2, spec.C_HH / 2),
             (spec.C_LH / 2, spec.C_LH / 2), (sb, sb), (spec.C_LH - sb, sb), (sb, spec.C_LH - sb)]
    best = 0.0
    for r in cands:
        if pair_outage(r, spec, pair, spec.d) <= eps + 1e-12:
            best = max(best, r[0] + r[1])
    return best


def fran_grid_objective(spec, n: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    pl, ph = spec.q / (spec.p + spec.q), spec.p / (spec.p + spec.q)
    sb = math.log2(1 + spec.S + spec.I_L)
    grid = np.linspace(0.0, spec.C_LL / 2, n)
    obj = 2 * (pl * pl + pl * ph) * grid + 2 * (pl * ph + ph * ph) * np.minimum(spec.C_LH - grid, sb)
    return grid, obj


# -- D-RAN ----------------------------------------------------------------------------------

def naive_dran_rate(direct, cross, k, d, combo, eps_bar) -> float:
    """Inverse CDF by listing every current local state with its probability."""
    bs = np.linalg.matrix_power(direct.transition, d)
    bi = np.linalg.matrix_power(cross.transition, d)
    atoms = {}
    for cur in itertools.product(range(direct.num_states), *[range(cross.num_states)] * (k - 1)):
        prob = bs[cur[0], combo[0]]
        for x, y in zip(cur[1:], combo[1:]):
            prob *= bi[x, y]
        rate = math.log2(1 + direct.levels[cur[0]] / (1 + sum(cross.levels[x] for x in cur[1:])))
        atoms[rate] = atoms.get(rate, 0.0) + prob
    below = 0.0
    chosen = None
    for rate in sorted(atoms):
        if atoms[rate] <= 0:
            continue
        if below <= eps_bar:
            chosen = rate
        below += atoms[rate]
    return chosen


# -- F-RAN ----------------------------------------------------------------------------------

def naive_fran_lp(scn, eps_bar) -> float:
    """Coupled program with one variable per (user, raw local delayed combo) and one
    row per (delayed joint state, subset), solved by HiGHS without any merging."""
    from scipy.optimize import linprog

    k = scn.k
    idx = scn.space.indices
    chains = [scn.direct] * k + [scn.cross] * (k * (k - 1))
    pairs = [(j, i) for j in range(k) for i in range(k) if i != j]
    local = [[j] + [k + p for p, (r, _) in enumerate(pairs) if r == j] for j in range(k)]

    # percentile of every process, by walking the d-step column from the bottom
    pct = np.empty_like(idx)
    for p, chain in enumerate(chains):
        T = np.linalg.matrix_power(chain.transition, scn.d_e)
        for s in range(idx.shape[0]):
            col = T[:, idx[s, p]]
            level, below = 0, 0.0
            for n in range(col.size):
                if below <= eps_bar:
                    level = n
                below += col[n]
            pct[s, p] = level
    flat_pct = np.ravel_multi_index(tuple(pct.T), scn.space.shape)
    bounds = scn.bounds[flat_pct]

    local_shape = (scn.direct.num_states,) + (scn.cross.num_states,) * (k - 1)
    n_local = int(np.prod(local_shape))
    var = np.stack([np.ravel_multi_index(tuple(idx[:, local[j]].T), local_shape) + j * n_local
                    for j in range(k)], axis=1)
    weights = np.ones(idx.shape[0])
    for p, chain in enumerate(chains):
        weights *= chain.stationary[idx[:, p]]

    c = np.zeros(k * n_local)
    for j in range(k):
        np.add.at(c, var[:, j], weights)
    subs = [tuple(j for j in range(k) if m >> j & 1) for m in range(1, 2**k)]
    A, b = [], []
    for s in range(idx.shape[0]):
        for r, sub in enumerate(subs):
            row = np.zeros(k * n_local)
            row[var[s, list(sub)]] = 1.0
            A.append(row)
            b.append(max(bounds[s, r], 0.0))
    res = linprog(-c, A_ub=np.array(A), b_ub=np.array(b), bounds=(0, None), method="highs")
    assert res.status == 0
    return float(-res.fun)
