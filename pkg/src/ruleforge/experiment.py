"""Nested cross-validation experiments and their JSON reports."""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .dataset import Dataset, grid_search, mean_std, stratified_kfold
from .forest import ForestParams, fit_forest, forest_predict
from .mirco import evaluate_mirco, mirco_from_forest
from .rcboost import RcbParams, initial_pool, rcb_predict, run_rcboost
from .rules import RulePool, predict_many
from .tree import TreeParams, fit_tree, n_leaves, predict_tree

SCHEMA = 1
DEFAULT_GRIDS = {
    "max_depth": [5, 10, 20],
    "n_trees": [10, 50, 100],
    "max_rmp_calls": [5, 10, 50, 100, 200],
}


class InvariantError(RuntimeError):
    """A result violated a guarantee the algorithms are supposed to keep."""


_forest_cache: dict = {}


def _data_key(ds: Dataset) -> str:
    h = hashlib.sha1(ds.features.tobytes())
    h.update(ds.labels.tobytes())
    return h.hexdigest()


def _forest(train: Dataset, depth: int, n_trees: int, seed: int, criterion: str):
    key = (_data_key(train), depth, n_trees, seed, criterion)
    forest = _forest_cache.get(key)
    if forest is None:
        if len(_forest_cache) > 64:
            _forest_cache.clear()
        params = ForestParams(n_trees, TreeParams(max_depth=depth, criterion=criterion), seed)
        forest = fit_forest(train, params)
        _forest_cache[key] = forest
    return forest


def _accuracy(pred, labels) -> float:
    return float(np.mean(np.asarray(pred) == labels))


def train_dt(train, test, params, seed, criterion="gini"):
    tree = fit_tree(train, None, TreeParams(max_depth=params["max_depth"], criterion=criterion, seed=seed))
    return _accuracy(predict_tree(tree, test.features), test.labels)


def train_rf(train, test, params, seed, criterion="gini"):
    forest = _forest(train, params["max_depth"], params["n_trees"], seed, criterion)
    return _accuracy(forest_predict(forest, test.features), test.labels)


def train_mirco(train, test, params, seed, criterion="gini"):
    forest = _forest(train, params["max_depth"], params["n_trees"], seed, criterion)
    result = mirco_from_forest(forest, train, criterion)
    return evaluate_mirco(result, test)["accuracy"]


def train_rcb(train, test, params, seed, criterion="gini"):
    pool, _ = run_rcboost(train, _rcb_params(params, seed, criterion))
    return _accuracy(rcb_predict(pool, test.features), test.labels)


def _rcb_params(params, seed, criterion):
    return RcbParams(
        max_rmp_calls=params["max_rmp_calls"],
        tree_params=TreeParams(max_depth=params["max_depth"], criterion=criterion, seed=seed),
        seed=seed,
    )


TRAINERS: dict[str, Callable] = {
    "dt": train_dt,
    "rf": train_rf,
    "mirco": train_mirco,
    "rcb": train_rcb,
}

# algorithm -> grid keys it is tuned over
ALGORITHM_GRIDS = {
    "dt": ("max_depth",),
    "rf": ("max_depth", "n_trees"),
    "mirco": ("max_depth", "n_trees"),
    "rcb": ("max_depth", "max_rmp_calls"),
}

COMMAND_ALGORITHMS = {
    "mirco": ("dt", "rf", "mirco"),
    "rcboost": ("rf", "rcb"),
}


@dataclass
class ExperimentConfig:
    command: str  # "mirco" | "rcboost"
    outer: int = 10
    inner: int = 4
    seed: int = 0
    criterion: str = "gini"
    grids: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_GRIDS.items()})
    trace: bool = False
    workers: int = 1

    def grid_for(self, algorithm: str) -> dict:
        return {k: list(self.grids[k]) for k in ALGORITHM_GRIDS[algorithm]}


def _with_criterion(fn, criterion):
    def trainer(train, test, params, seed):
        return fn(train, test, params, seed, criterion)

    return trainer


def tune(train: Dataset, algorithm: str, cfg: ExperimentConfig, seed: int):
    """Grid-search ``algorithm`` on stratified inner folds of ``train``."""
    grid = cfg.grid_for(algorithm)
    combos = math.prod(len(v) for v in grid.values())
    if combos == 1 or cfg.inner < 2:
        return {k: v[0] for k, v in grid.items()}, None, []
    inner = stratified_kfold(train, min(cfg.inner, train.m), seed)
    res = grid_search(train, grid, inner, _with_criterion(TRAINERS[algorithm], cfg.criterion), seed)
    return res.best_params, res.best_score, res.trace


def _fit_eval(algorithm, train, test, params, seed, cfg):
    """Fit ``algorithm`` on train with ``params`` and report test metrics."""
    crit = cfg.criterion
    out: dict = {"params": dict(params)}
    if algorithm == "dt":
        tree = fit_tree(train, None, TreeParams(max_depth=params["max_depth"], criterion=crit, seed=seed))
        out["accuracy"] = _accuracy(predict_tree(tree, test.features), test.labels)
        out["n_rules"] = n_leaves(tree)
    elif algorithm == "rf":
        forest = _forest(train, params["max_depth"], params["n_trees"], seed, crit)
        out["accuracy"] = _accuracy(forest_predict(forest, test.features), test.labels)
        out["n_rules"] = int(sum(n_leaves(t) for t in forest.trees))
    elif algorithm == "mirco":
        forest = _forest(train, params["max_depth"], params["n_trees"], seed, crit)
        n_dt = n_leaves(fit_tree(train, None, TreeParams(max_depth=params["max_depth"], criterion=crit)))
        result = mirco_from_forest(forest, train, crit, n_dt)
        cov = np.zeros(train.m, dtype=bool)
        for r in result.selected_pool:
            cov[r.covered_ids] = True
        if not cov.all():
            raise InvariantError("MIRCO selection does not cover every training sample")
        metrics = evaluate_mirco(result, test)
        out.update(
            accuracy=metrics["accuracy"],
            missed_fraction=metrics["missed_fraction"],
            n_rules=result.n_rules_selected,
            n_rules_forest=result.n_rules_forest,
            n_rules_forest_raw=result.n_rules_forest_raw,
            n_rules_dt=n_dt,
        )
    elif algorithm == "rcb":
        pool, trace = run_rcboost(train, _rcb_params(params, seed, crit))
        check_rcb_trace(trace)
        out["accuracy"] = _accuracy(rcb_predict(pool, test.features), test.labels)
        ini = initial_pool(pool, trace)
        out["inidt_accuracy"] = _accuracy(predict_many(ini, test.features, fallback=False)[0], test.labels)
        out["n_rules"] = len(pool)
        out["n_rules_initial"] = trace.initial_rules
        out["rmp_calls"] = trace.rmp_calls
        out["stop_reason"] = trace.stop_reason
        if cfg.trace:
            out["trace"] = trace.as_dict()
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return out


def check_rcb_trace(trace, tol: float = 1e-6) -> None:
    obj = trace.objectives
    for a, b in zip(obj, obj[1:]):
        if b > a + tol:
            raise InvariantError(f"RMP objective increased from {a} to {b}")
    for it in trace.iterations:
        if any(v >= 0 for v in it.admitted_reduced_costs):
            raise InvariantError(f"iteration {it.t} admitted a rule with nonnegative reduced cost")


def run_fold(data: Dataset, plan_assign: np.ndarray, fold: int, cfg: ExperimentConfig) -> dict:
    train_idx = np.flatnonzero(plan_assign != fold)
    test_idx = np.flatnonzero(plan_assign == fold)
    train, test = data.subset(train_idx), data.subset(test_idx)
    seed = cfg.seed + fold
    rec: dict = {"fold": fold, "seed": seed, "n_train": train.m, "n_test": test.m, "timing": {}}
    for algorithm in COMMAND_ALGORITHMS[cfg.command]:
        t0 = time.perf_counter()
        params, inner_score, trace = tune(train, algorithm, cfg, seed)
        result = _fit_eval(algorithm, train, test, params, seed, cfg)
        result["inner_accuracy"] = inner_score
        result["inner_runs"] = len(trace)
        rec[algorithm] = result
        rec["timing"][algorithm] = time.perf_counter() - t0
    return rec


def _summary(folds: list[dict], algorithms) -> dict:
    out = {}
    for a in algorithms:
        s = {}
        keys = ["accuracy", "missed_fraction", "n_rules", "n_rules_forest", "n_rules_dt", "inidt_accuracy", "rmp_calls"]
        for k in keys:
            vals = [f[a][k] for f in folds if k in f[a]]
            if vals:
                mean, std = mean_std(vals)
                s[f"{k}_mean"] = mean
                s[f"{k}_std"] = std
        out[a] = s
    return out


def run_experiment(data: Dataset, cfg: ExperimentConfig, name: str = "") -> dict:
    t0 = time.perf_counter()
    plan = stratified_kfold(data, cfg.outer, cfg.seed)
    folds_idx = range(cfg.outer)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            folds = list(ex.map(run_fold, [data] * cfg.outer, [plan.assignments] * cfg.outer, folds_idx, [cfg] * cfg.outer))
    else:
        folds = [run_fold(data, plan.assignments, f, cfg) for f in folds_idx]
    algorithms = COMMAND_ALGORITHMS[cfg.command]
    digest = hashlib.sha256(data.features.tobytes() + data.labels.tobytes()).hexdigest()
    return {
        "schema": SCHEMA,
        "command": cfg.command,
        "dataset": {"name": name, **data.characteristics(), "sha256": digest, "encodings": data.metadata.get("encodings", {})},
        "settings": {
            "outer_folds": cfg.outer,
            "inner_folds": cfg.inner,
            "seed": cfg.seed,
            "fold_seeds": [cfg.seed + f for f in folds_idx],
            "criterion": cfg.criterion,
            "grids": {a: cfg.grid_for(a) for a in algorithms},
        },
        "folds": folds,
        "summary": _summary(folds, algorithms),
        "timing": {"total_seconds": time.perf_counter() - t0},
    }


def strip_timing(obj):
    """Copy of a report without its wall-clock fields."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k != "timing"}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def fit_final_model(data: Dataset, cfg: ExperimentConfig) -> tuple[RulePool, dict]:
    """Tune on folds of the whole dataset, then fit the command's rule model on all of it."""
    algorithm = "mirco" if cfg.command == "mirco" else "rcb"
    params, _, _ = tune(data, algorithm, cfg, cfg.seed)
    if algorithm == "mirco":
        forest = _forest(data, params["max_depth"], params["n_trees"], cfg.seed, cfg.criterion)
        pool = mirco_from_forest(forest, data, cfg.criterion).selected_pool
    else:
        pool, _ = run_rcboost(data, _rcb_params(params, cfg.seed, cfg.criterion))
    return pool, params


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)
