"""Covering LP relaxation: primal rule weights ``z`` and per-sample duals.

The primal is::

    minimize  sum_j c_j z_j   s.t.  sum_{j in J(i)} z_j >= 1,  z >= 0

It is solved through its dual, ``maximize sum_i lam_i s.t.
sum_{i in I(j)} lam_i <= c_j, lam >= 0``, with a dense primal simplex.
The all-slack basis of the dual is feasible because every cost is
positive, so no phase one is needed.  ``z`` is read off the optimal basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .cover import CoverProblem

log = logging.getLogger(__name__)

EPS_FEAS = 1e-7
EPS_GAP = 1e-6
PIVOT_TOL = 1e-9


class LPError(RuntimeError):
    pass


@dataclass
class LPSolution:
    primal: np.ndarray  # z_j per rule
    duals: np.ndarray  # lambda_i per sample
    objective: float
    iterations: int
    status: str = "optimal"
    method: str = "simplex"


def reduced_cost(cost: float, covered, duals) -> float:
    """``cost - sum of duals over the covered samples``."""
    covered = np.asarray(covered, dtype=np.int64)
    return float(cost) - float(np.asarray(duals, dtype=np.float64)[covered].sum())


def reduced_costs(problem_costs, covered_sets, duals) -> np.ndarray:
    duals = np.asarray(duals, dtype=np.float64)
    return np.array([c - duals[ids].sum() for c, ids in zip(problem_costs, covered_sets)])


def solve_covering_lp(problem: CoverProblem, method: str = "simplex", max_pivots: int | None = None) -> LPSolution:
    if method == "simplex":
        return _simplex(problem, max_pivots)
    if method == "highs":
        return _highs(problem)
    raise ValueError(f"unknown LP method {method!r}")


def _simplex(problem: CoverProblem, max_pivots: int | None) -> LPSolution:
    m, n = problem.m, problem.n
    c = problem.costs
    A = problem.incidence()  # m x n
    limit = max_pivots if max_pivots is not None else 50 * (m + n)
    bland_after = 2 * (m + n)

    # rows: rules j; columns: lam_0..lam_{m-1}, slack_0..slack_{n-1}
    T = np.hstack([A.T, np.eye(n)])
    rhs = c.astype(np.float64).copy()
    obj = np.concatenate([np.ones(m), np.zeros(n)])  # reduced profits
    basis = np.arange(m, m + n)

    it = 0
    while True:
        if it < bland_after:
            q = int(np.argmax(obj))
            if obj[q] <= PIVOT_TOL:
                break
        else:
            cand = np.flatnonzero(obj > PIVOT_TOL)
            if cand.size == 0:
                break
            q = int(cand[0])
        col = T[:, q]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            raise LPError("dual unbounded; the covering LP would be infeasible")
        ratios = rhs[rows] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        if it < bland_after:
            r = int(tied[np.argmax(col[tied])])
        else:
            r = int(tied[np.argmin(basis[tied])])
        if it >= limit:
            raise LPError(
                f"pivot limit {limit} exceeded (m={m}, n={n}, dual objective {rhs[basis < m].sum():.6g})"
            )
        piv = T[r, q]
        T[r] /= piv
        rhs[r] /= piv
        f = T[:, q].copy()
        f[r] = 0.0
        # covering tableaus stay sparse; rows with f == 0 are unchanged
        nz = np.flatnonzero(f)
        T[nz] -= np.outer(f[nz], T[r])
        rhs[nz] -= f[nz] * rhs[r]
        obj -= obj[q] * T[r]
        basis[r] = q
        it += 1

    lam, z = _from_basis(A, c, basis, m, n)
    objective = float(lam.sum())
    return LPSolution(z, lam, objective, it, "optimal", "simplex")


def _from_basis(A, c, basis, m, n):
    # Recompute the basic solution from scratch; removes drift of the tableau.
    full = np.hstack([A.T, np.eye(n)])
    B = full[:, basis]
    xb = np.linalg.solve(B, c)
    cb = (basis < m).astype(np.float64)
    z = np.linalg.solve(B.T, cb)
    lam = np.zeros(m)
    mask = basis < m
    lam[basis[mask]] = xb[mask]
    lam[np.abs(lam) < 1e-13] = 0.0
    z[np.abs(z) < 1e-13] = 0.0
    return np.maximum(lam, 0.0), np.maximum(z, 0.0)


def _highs(problem: CoverProblem) -> LPSolution:
    from scipy.optimize import linprog

    A = problem.incidence()
    res = linprog(problem.costs, A_ub=-A, b_ub=-np.ones(problem.m), bounds=(0, None), method="highs")
    if res.status != 0:
        raise LPError(f"HiGHS failed: {res.message}")
    lam = np.maximum(-res.ineqlin.marginals, 0.0)
    return LPSolution(np.maximum(res.x, 0.0), lam, float(res.fun), int(res.nit), "optimal", "highs")
