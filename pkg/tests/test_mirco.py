import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dataset
from ruleforge.dataset import Dataset, stratified_kfold
from ruleforge.forest import ForestParams, fit_forest
from ruleforge.mirco import evaluate_mirco, forest_rule_pool, mirco_from_forest, run_mirco
from ruleforge.rules import extract_rules
from ruleforge.tree import TreeParams, fit_tree, leaves


def three_class_blob(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 2))
    y = (X[:, 0] > 0).astype(int) + (X[:, 1] > 0.5).astype(int)
    return Dataset.from_arrays(X, y)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), max_depth=st.integers(1, 5))
def test_single_tree_forest_selects_every_leaf(seed, max_depth):
    ds = random_dataset(np.random.default_rng(seed), m=40, p=3, K=3)
    params = ForestParams(n_trees=1, tree_params=TreeParams(max_depth=max_depth), bootstrap=False, max_features="all")
    res = run_mirco(ds, params, baseline_dt=False)
    tree = fit_tree(ds, None, params.tree_params)
    expected = {r.key for r in extract_rules(tree, ds)}
    assert {r.key for r in res.selected_pool} == expected
    assert len(expected) == sum(1 for lf in leaves(tree) if lf.sample_ids.size)


def test_selection_may_overlap_and_leave_gaps():
    ds = three_class_blob(7)
    forest = fit_forest(ds, ForestParams(n_trees=5, tree_params=TreeParams(max_depth=3), seed=7))
    res = mirco_from_forest(forest, ds)
    grid = np.array([[a, b] for a in np.linspace(-3, 3, 25) for b in np.linspace(-3, 3, 25)])
    hits = res.selected_pool.membership(grid).sum(axis=1)
    assert (hits > 1).any()
    assert (hits == 0).any()


def test_training_points_never_missed(wine):
    res = run_mirco(wine, ForestParams(n_trees=20, tree_params=TreeParams(max_depth=5), seed=0))
    assert res.missed_fraction == 0.0
    sub = wine.subset(np.arange(0, wine.m, 3))
    assert evaluate_mirco(res, sub)["missed_fraction"] == 0.0
    assert res.n_rules_selected <= res.n_rules_forest <= res.n_rules_forest_raw
    assert res.n_rules_dt is not None


def test_far_point_is_missed_but_classified():
    ds = three_class_blob(7)
    forest = fit_forest(ds, ForestParams(n_trees=5, tree_params=TreeParams(max_depth=3), seed=7))
    res = mirco_from_forest(forest, ds)
    grid = np.array([[a, b] for a in np.linspace(-3, 3, 25) for b in np.linspace(-3, 3, 25)])
    far = grid[res.selected_pool.membership(grid).sum(axis=1) == 0][:1]
    test = Dataset.from_arrays(far, [0], class_names=ds.class_names, require_all_classes=False)
    metrics = evaluate_mirco(res, test)
    assert metrics["n_missed"] == 1 and metrics["n_test"] == 1


def test_pool_counts(wine):
    forest = fit_forest(wine, ForestParams(n_trees=3, tree_params=TreeParams(max_depth=3)))
    pool, raw = forest_rule_pool(forest, wine, "gini")
    assert raw == sum(len(leaves(t)) for t in forest.trees)
    assert len(pool) <= raw


def test_schema_mismatch_rejected(wine):
    res = run_mirco(wine, ForestParams(n_trees=3, tree_params=TreeParams(max_depth=3)))
    bad = Dataset.from_arrays(np.zeros((2, 3)), [0, 1])
    with pytest.raises(ValueError):
        evaluate_mirco(res, bad)


def test_wine_cv_accuracy(wine):
    accs = []
    for tr, te in stratified_kfold(wine, 5, seed=0):
        res = run_mirco(wine.subset(tr), ForestParams(n_trees=20, tree_params=TreeParams(max_depth=5), seed=0))
        accs.append(evaluate_mirco(res, wine.subset(te))["accuracy"])
    assert np.mean(accs) >= 0.85
