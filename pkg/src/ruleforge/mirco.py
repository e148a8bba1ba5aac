"""Minimum rule cover of a random forest (MIRCO)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cover import CoverSolution, greedy_cover
from .dataset import Dataset
from .forest import Forest, ForestParams, fit_forest
from .rules import RulePool, build_coverage, dedup, extract_rules, predict_many
from .tree import fit_tree, n_leaves


@dataclass
class MircoResult:
    selected_pool: RulePool
    n_rules_selected: int
    n_rules_forest: int  # deduplicated
    n_rules_forest_raw: int
    n_rules_dt: int | None
    accuracy: float  # on the training set
    missed_fraction: float  # on the training set; always 0 by construction
    cover: CoverSolution
    forest: Forest | None = field(default=None, repr=False)


def forest_rule_pool(forest: Forest, train: Dataset, criterion: str) -> tuple[RulePool, int]:
    """All leaf rules of the forest, re-evaluated on ``train`` and deduplicated."""
    raw = []
    for t, tree in enumerate(forest.trees):
        raw.extend(extract_rules(tree, train, criterion, provenance=f"tree:{t}/"))
    pool = dedup(raw, n_classes=train.K, criterion=criterion)
    pool.feature_names = train.feature_names
    pool.class_names = train.class_names
    return pool, len(raw)


def mirco_from_forest(forest: Forest, train: Dataset, criterion: str = "gini", n_rules_dt: int | None = None) -> MircoResult:
    pool, n_raw = forest_rule_pool(forest, train, criterion)
    problem = build_coverage(pool, train)
    solution = greedy_cover(problem)
    selected = RulePool(
        [pool.rules[j] for j in solution.selected],
        train.K,
        criterion,
        train.feature_names,
        train.class_names,
    )
    pred, missed = predict_many(selected, train.features, fallback=True)
    return MircoResult(
        selected_pool=selected,
        n_rules_selected=len(selected),
        n_rules_forest=len(pool),
        n_rules_forest_raw=n_raw,
        n_rules_dt=n_rules_dt,
        accuracy=float(np.mean(pred == train.labels)),
        missed_fraction=float(np.mean(missed)),
        cover=solution,
        forest=forest,
    )


def run_mirco(
    train: Dataset,
    forest_params: ForestParams,
    criterion: str | None = None,
    baseline_dt: bool = True,
    workers: int = 1,
) -> MircoResult:
    """Fit a forest, pool its leaf rules and keep a greedy minimum-cost cover.

    Impurities are evaluated on the full training set and each rule costs
    ``1 + impurity``.  The baseline decision tree, used only for its leaf
    count, is grown with the forest's ``max_depth``.
    """
    criterion = criterion or forest_params.tree_params.criterion
    forest = fit_forest(train, forest_params, workers=workers)
    n_dt = None
    if baseline_dt:
        n_dt = n_leaves(fit_tree(train, None, forest_params.tree_params))
    return mirco_from_forest(forest, train, criterion, n_dt)


def evaluate_mirco(result: MircoResult | RulePool, test: Dataset) -> dict:
    """Accuracy on ``test`` with the clause-fraction fallback for missed points."""
    pool = result.selected_pool if isinstance(result, MircoResult) else result
    if test.p != (len(pool.feature_names) or test.p):
        raise ValueError("test features do not match the training schema")
    pred, missed = predict_many(pool, test.features, fallback=True)
    return {
        "accuracy": float(np.mean(pred == test.labels)),
        "missed_fraction": float(np.mean(missed)),
        "n_missed": int(missed.sum()),
        "n_test": test.m,
    }
