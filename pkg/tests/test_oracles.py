import numpy as np
import pytest

from ruleforge.oracles import check_lp_certificate, enumerate_small_trees, exact_cover_bruteforce

CYCLE = dict(m=3, costs=[1.0, 1.0, 1.0], covered=[[0, 1], [1, 2], [0, 2]])


def test_hand_built_cycle_pair():
    cert = check_lp_certificate(**CYCLE, primal=[0.5] * 3, duals=[0.5] * 3)
    assert max(cert.as_dict().values()) <= 1e-12
    assert cert.passes()


def test_perturbed_primal_shows_gap():
    cert = check_lp_certificate(**CYCLE, primal=[0.6, 0.5, 0.5], duals=[0.5] * 3)
    assert cert.gap > 0.05
    assert not cert.passes()


def test_negative_dual_flagged():
    cert = check_lp_certificate(**CYCLE, primal=[0.5] * 3, duals=[-0.1, 0.5, 0.5])
    assert cert.dual_residual > 0


def test_infeasible_primal_flagged():
    cert = check_lp_certificate(**CYCLE, primal=[0.2, 0.2, 0.2], duals=[0.0] * 3)
    assert cert.primal_residual == pytest.approx(0.6)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        check_lp_certificate(**CYCLE, primal=[1.0], duals=[0.0] * 3)


def test_tree_oracle_xor():
    X = [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert enumerate_small_trees(X, [0, 1, 1, 0], 2) == 1.0
    assert enumerate_small_trees(X, [0, 1, 1, 0], 1) == 0.5


def test_tree_oracle_separable_and_pure():
    assert enumerate_small_trees([[1], [2], [3], [4]], [0, 0, 1, 1], 1) == 1.0
    assert enumerate_small_trees([[1], [2]], [1, 1], 0) == 1.0


def test_tree_oracle_refuses_large():
    with pytest.raises(ValueError):
        enumerate_small_trees(np.zeros((51, 1)), np.zeros(51, int), 1)
    with pytest.raises(ValueError):
        enumerate_small_trees(np.zeros((5, 5)), np.zeros(5, int), 1)
    with pytest.raises(ValueError):
        enumerate_small_trees(np.zeros((5, 1)), np.zeros(5, int), 3)


def test_cover_bruteforce_tie_break():
    cost, sel = exact_cover_bruteforce(**CYCLE)
    assert (cost, sel) == (2.0, (0, 1))


def test_tree_oracle_bounds_fit_tree():
    from ruleforge.dataset import Dataset
    from ruleforge.tree import TreeParams, fit_tree, predict_tree

    rng = np.random.default_rng(1)
    for _ in range(20):
        X = rng.integers(0, 4, size=(20, 2)).astype(float)
        y = rng.integers(0, 2, size=20)
        y[:2] = [0, 1]
        ds = Dataset.from_arrays(X, y)
        for d in (1, 2):
            acc = np.mean(predict_tree(fit_tree(ds, None, TreeParams(max_depth=d)), X) == y)
            assert acc <= enumerate_small_trees(X, y, d) + 1e-12
