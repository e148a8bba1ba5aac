"""Rule cover boosting (RCBoost): grow a rule pool by column generation.

Each round solves the covering LP over the current pool, adds the duals to
the running sample weights, grows a weighted tree and admits its leaves
whose reduced cost under the round's duals is negative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .lp import LPError, reduced_cost, solve_covering_lp
from .rules import RulePool, build_coverage, dedup, extract_rules, predict_many
from .tree import TreeParams, fit_tree

log = logging.getLogger(__name__)

# admission threshold on reduced costs; matches the LP feasibility tolerance
ADMIT_TOL = 1e-7


@dataclass(frozen=True)
class RcbParams:
    max_rmp_calls: int = 100
    tree_params: TreeParams = TreeParams(max_depth=5)
    criterion: str | None = None  # defaults to tree_params.criterion
    seed: int = 0
    lp_method: str = "simplex"

    def __post_init__(self):
        if self.max_rmp_calls < 1:
            raise ValueError("max_rmp_calls must be at least 1")

    @property
    def rule_criterion(self) -> str:
        return self.criterion or self.tree_params.criterion


@dataclass
class RcbIteration:
    t: int
    objective: float
    pool_size: int
    candidates: int
    admitted: int
    min_reduced_cost: float
    admitted_reduced_costs: list[float]
    lp_iterations: int

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "objective": self.objective,
            "pool_size": self.pool_size,
            "candidates": self.candidates,
            "admitted": self.admitted,
            "min_reduced_cost": self.min_reduced_cost,
            "admitted_reduced_costs": self.admitted_reduced_costs,
            "lp_iterations": self.lp_iterations,
        }


@dataclass
class RcbTrace:
    iterations: list[RcbIteration] = field(default_factory=list)
    initial_rules: int = 0
    stop_reason: str = ""
    # duals of every RMP solve; kept for auditing, not serialized
    duals: list[np.ndarray] = field(default_factory=list, repr=False)
    final_weights: np.ndarray | None = field(default=None, repr=False)

    @property
    def rmp_calls(self) -> int:
        return len(self.iterations)

    @property
    def objectives(self) -> list[float]:
        return [it.objective for it in self.iterations]

    def as_dict(self) -> dict:
        return {
            "initial_rules": self.initial_rules,
            "stop_reason": self.stop_reason,
            "rmp_calls": self.rmp_calls,
            "iterations": [it.as_dict() for it in self.iterations],
        }


def run_rcboost(train: Dataset, params: RcbParams | None = None) -> tuple[RulePool, RcbTrace]:
    """Train RCBoost on ``train``; returns the final pool and the iteration trace.

    Stops when no candidate leaf has negative reduced cost, when every
    admissible candidate is already pooled, or after ``max_rmp_calls`` LP
    solves.
    """
    params = params or RcbParams()
    crit = params.rule_criterion
    tp = params.tree_params
    weights = np.ones(train.m)

    initial = extract_rules(fit_tree(train, weights, tp), train, crit, provenance="ini/")
    pool = dedup(initial, n_classes=train.K, criterion=crit)
    pool.feature_names = train.feature_names
    pool.class_names = train.class_names
    trace = RcbTrace(initial_rules=len(pool))

    for t in range(1, params.max_rmp_calls + 1):
        problem = build_coverage(pool, train)
        try:
            sol = solve_covering_lp(problem, params.lp_method)
        except LPError as exc:
            raise LPError(f"RMP solve failed at iteration {t} (pool size {len(pool)}): {exc}") from exc
        duals = sol.duals
        weights = weights + duals
        trace.duals.append(duals)

        candidates = extract_rules(fit_tree(train, weights, tp), train, crit, provenance=f"rmp:{t}/")
        rcs = [reduced_cost(r.cost, r.covered_ids, duals) for r in candidates]
        negative = [(r, v) for r, v in zip(candidates, rcs) if v < -ADMIT_TOL]

        known = set(pool.keys())
        fresh = []
        for r, v in negative:
            if r.key not in known:
                known.add(r.key)
                fresh.append((r, v))
        pool.extend(r for r, _ in fresh)

        trace.iterations.append(
            RcbIteration(
                t=t,
                objective=sol.objective,
                pool_size=problem.n,
                candidates=len(candidates),
                admitted=len(fresh),
                min_reduced_cost=float(min(rcs)) if rcs else float("inf"),
                admitted_reduced_costs=[float(v) for _, v in fresh],
                lp_iterations=sol.iterations,
            )
        )
        log.debug("rcboost t=%d phi=%.6f pool=%d admitted=%d", t, sol.objective, problem.n, len(fresh))
        if not negative:
            trace.stop_reason = "converged"
            break
        if not fresh:
            trace.stop_reason = "stalled"
            break
    else:
        trace.stop_reason = "max_rmp_calls"
    trace.final_weights = weights
    return pool, trace


def rcb_predict(pool: RulePool, X) -> np.ndarray | int:
    """Majority vote of all accepting rules; the initial tree's leaves make a miss impossible."""
    arr = np.asarray(X, dtype=np.float64)
    pred, _ = predict_many(pool, np.atleast_2d(arr), fallback=False)
    return int(pred[0]) if arr.ndim == 1 else pred


def initial_pool(pool: RulePool, trace: RcbTrace) -> RulePool:
    """The rules of the initial tree alone (the iniDT baseline)."""
    return RulePool(pool.rules[: trace.initial_rules], pool.n_classes, pool.criterion, pool.feature_names, pool.class_names)
