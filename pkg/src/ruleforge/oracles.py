"""Brute-force verifiers for the optimization and tree-growing routines.

Nothing here calls the code it checks: LP certificates are recomputed
from the definitions and small trees are enumerated exhaustively.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .cover import exact_cover  # noqa: F401  (re-exported oracle)

TREE_ORACLE_MAX_M = 50
TREE_ORACLE_MAX_P = 4


@dataclass(frozen=True)
class Certificate:
    primal_residual: float
    dual_residual: float
    gap: float
    comp_slack_max: float

    def passes(self, eps_feas: float = 1e-7, eps_gap: float = 1e-6, eps_cs: float = 1e-6) -> bool:
        return (
            self.primal_residual <= eps_feas
            and self.dual_residual <= eps_feas
            and self.gap <= eps_gap
            and self.comp_slack_max <= eps_cs
        )

    def as_dict(self) -> dict:
        return {
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "gap": self.gap,
            "comp_slack_max": self.comp_slack_max,
        }


def check_lp_certificate(m: int, costs, covered, primal, duals) -> Certificate:
    """Optimality residuals of a (z, lambda) pair for the covering LP.

    * primal residual: worst violation of ``sum_{j covers i} z_j >= 1`` or ``z >= 0``
    * dual residual: worst violation of ``sum_{i in I(j)} lam_i <= c_j`` or ``lam >= 0``
    * gap: ``|c.z - sum(lam)|``
    * complementary slackness: largest ``|lam_i * row slack|`` or ``|z_j * reduced cost|``
    """
    costs = [float(c) for c in costs]
    z = [float(v) for v in primal]
    lam = [float(v) for v in duals]
    if len(z) != len(costs) or len(lam) != m:
        raise ValueError("dimension mismatch between problem and solution")

    row = [0.0] * m
    col = [0.0] * len(costs)
    for j, ids in enumerate(covered):
        for i in ids:
            row[int(i)] += z[j]
            col[j] += lam[int(i)]

    primal_res = max([0.0] + [1.0 - r for r in row] + [-v for v in z])
    dual_res = max([0.0] + [col[j] - costs[j] for j in range(len(costs))] + [-v for v in lam])
    gap = abs(sum(c * v for c, v in zip(costs, z)) - sum(lam))
    cs = max(
        [0.0]
        + [abs(lam[i] * (row[i] - 1.0)) for i in range(m)]
        + [abs(z[j] * (costs[j] - col[j])) for j in range(len(costs))]
    )
    return Certificate(primal_res, dual_res, gap, cs)


def _midpoints(values):
    u = sorted(set(values))
    return [(a + b) / 2.0 for a, b in zip(u, u[1:])]


def _best_leaf_hits(labels) -> int:
    if not labels:
        return 0
    return max(labels.count(k) for k in set(labels))


def _best_hits(X, y, ids, depth) -> int:
    best = _best_leaf_hits([y[i] for i in ids])
    if depth == 0 or len(ids) < 2:
        return best
    for f in range(len(X[0])):
        for t in _midpoints([X[i][f] for i in ids]):
            left = [i for i in ids if X[i][f] <= t]
            right = [i for i in ids if X[i][f] > t]
            hits = _best_hits(X, y, left, depth - 1) + _best_hits(X, y, right, depth - 1)
            if hits > best:
                best = hits
    return best


def enumerate_small_trees(X, y, max_depth: int = 2) -> float:
    """Best training accuracy reachable by any axis-aligned tree of depth <= max_depth.

    Splits are tried at every midpoint of every feature; leaves predict their
    majority class.
    """
    X = [list(map(float, row)) for row in np.atleast_2d(np.asarray(X, dtype=float))]
    y = [int(v) for v in y]
    if len(X) > TREE_ORACLE_MAX_M or len(X[0]) > TREE_ORACLE_MAX_P:
        raise ValueError(
            f"tree oracle is limited to m <= {TREE_ORACLE_MAX_M}, p <= {TREE_ORACLE_MAX_P}"
        )
    if not 0 <= max_depth <= 2:
        raise ValueError("tree oracle supports max_depth 0, 1 or 2")
    return _best_hits(X, y, list(range(len(X))), max_depth) / len(X)


def exact_cover_bruteforce(m: int, costs, covered) -> tuple[float, tuple[int, ...]]:
    """Plain itertools enumeration, independent of :func:`exact_cover`'s bitmask DP."""
    n = len(costs)
    best = (float("inf"), ())
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            hit = set()
            for j in combo:
                hit.update(int(i) for i in covered[j])
            if len(hit) == m:
                cost = sum(float(costs[j]) for j in combo)
                if cost < best[0] - 1e-12 or (abs(cost - best[0]) <= 1e-12 and combo < best[1]):
                    best = (cost, combo)
    return best
