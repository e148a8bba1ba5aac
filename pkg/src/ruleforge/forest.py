"""Random forest of weighted CART trees (bootstrap + per-node feature sampling)."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset
from .tree import TreeNode, TreeParams, apply, fit_tree, leaves


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    tree_params: TreeParams = TreeParams(max_depth=10)
    seed: int = 0
    bootstrap: bool = True
    # None -> ceil(sqrt(p)) candidate features per split
    max_features: int | str | None = None
    vote: str = "counts"

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if self.vote not in ("counts", "tree"):
            raise ValueError("vote must be 'counts' or 'tree'")


@dataclass(eq=False)
class Forest:
    trees: list[TreeNode]
    params: ForestParams
    tree_seeds: list[int]
    n_classes: int
    bootstrap_indices: list[np.ndarray]


def _tree_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng([seed, t])


def fit_forest(dataset: Dataset, params: ForestParams, workers: int = 1) -> Forest:
    """Fit ``params.n_trees`` trees, each on a size-m bootstrap sample.

    Tree ``t`` draws its bootstrap sample and its split seed from
    ``(params.seed, t)`` only, so the forest is independent of scheduling.
    A bootstrap sample enters the fit as multiplicity weights.
    """
    m, p = dataset.m, dataset.p
    if params.max_features is None:
        n_feat: int | str = math.ceil(math.sqrt(p))
    else:
        n_feat = params.max_features
    if n_feat != "all" and n_feat >= p:
        n_feat = "all"

    def one(t: int):
        rng = _tree_rng(params.seed, t)
        if params.bootstrap:
            idx = rng.integers(0, m, size=m)
            weights = np.bincount(idx, minlength=m).astype(np.float64)
        else:
            idx = np.arange(m)
            weights = np.ones(m)
        tree_seed = int(rng.integers(0, 2**31 - 1))
        tp = replace(params.tree_params, feature_subsample=n_feat, seed=tree_seed)
        return fit_tree(dataset, weights, tp), tree_seed, idx

    if workers > 1 and params.n_trees > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(one, range(params.n_trees)))
    else:
        results = [one(t) for t in range(params.n_trees)]
    return Forest(
        trees=[r[0] for r in results],
        params=params,
        tree_seeds=[r[1] for r in results],
        n_classes=dataset.K,
        bootstrap_indices=[r[2] for r in results],
    )


def forest_votes(forest: Forest, X) -> np.ndarray:
    """Per-class vote totals, shape ``(n, K)``.

    With ``vote="counts"`` every tree contributes the (bootstrap-weighted)
    class totals of the leaf a point falls in; with ``vote="tree"`` each
    tree casts one vote for its leaf majority.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    votes = np.zeros((X.shape[0], forest.n_classes))
    for tree in forest.trees:
        lv = leaves(tree)
        which = apply(tree, X)
        if forest.params.vote == "counts":
            table = np.array([l.totals for l in lv])
        else:
            table = np.zeros((len(lv), forest.n_classes))
            for i, l in enumerate(lv):
                table[i, int(np.argmax(l.totals))] = 1.0
        votes += table[which]
    return votes


def forest_predict(forest: Forest, X) -> np.ndarray | int:
    """Majority vote; ties go to the lowest class index.

    A single feature vector returns one class, a matrix returns an array.
    """
    arr = np.asarray(X, dtype=np.float64)
    pred = np.argmax(forest_votes(forest, arr), axis=1)
    return int(pred[0]) if arr.ndim == 1 else pred
