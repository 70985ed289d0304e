"""Linear-program maximization: ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

Small problems go through a dense tableau simplex with Bland's rule, which is
deterministic and cannot cycle.  Problems too large for a dense tableau are
handed to HiGHS through :func:`scipy.optimize.linprog`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

DENSE_LIMIT = 2_000_000  # tableau entries


class LPError(RuntimeError):
    pass


class LPUnboundedError(LPError):
    pass


class LPNumericalError(LPError):
    pass


@dataclass
class LinearProgram:
    c: np.ndarray
    A: object  # dense ndarray or scipy sparse matrix
    b: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.b = np.asarray(self.b, dtype=float).ravel()
        if not sp.issparse(self.A):
            self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        m, n = self.A.shape
        if n != self.c.size or m != self.b.size or n < 1:
            raise ValueError(f"inconsistent LP shapes: A {self.A.shape}, c {self.c.size}, b {self.b.size}")
        if not np.all(np.isfinite(self.b)):
            raise ValueError("right-hand side must be finite")
        if np.any(self.b < 0):
            raise ValueError("origin must be feasible (b >= 0)")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass
class LPResult:
    objective: float
    x: np.ndarray
    duals: np.ndarray
    iterations: int
    method: str


def _simplex(lp: LinearProgram, tol: float = 1e-11, max_iter: int = 100_000) -> LPResult:
    A = lp.A.toarray() if sp.issparse(lp.A) else lp.A
    m, n = A.shape
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = lp.b
    tab[m, :n] = -lp.c
    basis = list(range(n, n + m))
    scale = max(1.0, np.abs(A).max(initial=0.0), np.abs(lp.c).max(initial=0.0))
    eps = tol * scale

    it = 0
    while True:
        red = tab[m, :-1]
        candidates = np.flatnonzero(red < -eps)
        if candidates.size == 0:
            break
        if it >= max_iter:
            raise LPNumericalError(f"no convergence after {max_iter} pivots")
        col = int(candidates[0])  # Bland: lowest-index improving column
        column = tab[:m, col]
        pos = column > eps
        if not pos.any():
            raise LPUnboundedError(f"objective unbounded along column {col}")
        ratios = np.full(m, np.inf)
        ratios[pos] = tab[:m, -1][pos] / column[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + eps * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))  # Bland: lowest-index leaving variable
        piv = tab[row, col]
        if abs(piv) < 1e-14 * scale:
            full = np.hstack([A, np.eye(m)])
            cond = np.linalg.cond(full[:, basis[:row] + [col] + basis[row + 1:]])
            raise LPNumericalError(
                f"pivot {piv:.3e} too small; basis condition number {cond:.3e}")
        tab[row] /= piv
        others = np.arange(m + 1) != row
        tab[others] -= np.outer(tab[others, col], tab[row])
        basis[row] = col
        it += 1

    x = np.zeros(n + m)
    x[basis] = tab[:m, -1]
    return LPResult(float(tab[m, -1]), np.clip(x[:n], 0.0, None), tab[m, n:n + m].copy(), it, "simplex")


def _highs(lp: LinearProgram) -> LPResult:
    res = linprog(-lp.c, A_ub=lp.A, b_ub=lp.b, bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status == 3:
        raise LPUnboundedError("objective unbounded")
    if res.status != 0:
        raise LPNumericalError(f"HiGHS failed: {res.message}")
    duals = -np.asarray(res.ineqlin.marginals)
    return LPResult(float(-res.fun), np.clip(res.x, 0.0, None), duals, int(res.nit), "highs")


def solve_max(lp: LinearProgram, method: str = "auto") -> LPResult:
    """Maximize ``lp``; ``method`` is ``"simplex"``, ``"highs"`` or ``"auto"`` (by size)."""
    m, n = lp.shape
    if method == "auto":
        method = "simplex" if (m + 1) * (n + m + 1) <= DENSE_LIMIT else "highs"
    if method == "simplex":
        return _simplex(lp)
    if method == "highs":
        return _highs(lp)
    raise ValueError(f"unknown LP method {method!r}")


def polish_feasible(A, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Shift a nonnegative-coefficient solution down by its worst violation so ``A x <= b`` holds exactly."""
    viol = float(np.max(A @ x - b, initial=0.0))
    if viol <= 0.0:
        return x
    return np.clip(x - viol, 0.0, None)
