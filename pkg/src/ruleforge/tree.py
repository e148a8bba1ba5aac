"""Weighted CART-style classification tree.

Serves as the random forest base learner and as the pricing proxy of the
boosting loop, where the per-sample weights are accumulated LP duals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import splitter
from .dataset import Dataset

CRITERIA = {"gini": splitter.GINI, "entropy": splitter.ENTROPY}


def weighted_impurity(class_weight_totals, criterion: str = "gini") -> float:
    """Impurity of a node with the given per-class weight totals.

    Gini is ``1 - sum_k (U_k / U)**2``.  Entropy is the Shannon entropy of
    the normalized totals divided by ``ln K`` so that both criteria lie in
    ``[0, 1]``.
    """
    totals = np.asarray(class_weight_totals, dtype=np.float64)
    if totals.ndim != 1 or totals.size < 1:
        raise ValueError("class totals must be a non-empty vector")
    if np.any(totals < 0):
        raise ValueError("class totals must be nonnegative")
    total = float(totals.sum())
    if total <= 0.0:
        raise ValueError("class totals are all zero")
    p = totals / total
    if criterion == "gini":
        return float(1.0 - np.dot(p, p))
    if criterion == "entropy":
        if totals.size < 2:
            return 0.0
        nz = p[p > 0]
        h = float(-(nz * np.log(nz)).sum()) / math.log(totals.size)
        return max(h, 0.0)
    raise ValueError(f"unknown criterion {criterion!r}")


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 5
    min_samples_split: int = 2
    criterion: str = "gini"
    feature_subsample: int | str = "all"
    seed: int = 0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be at least 2")
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {sorted(CRITERIA)}")
        if self.feature_subsample != "all" and (
            not isinstance(self.feature_subsample, (int, np.integer)) or self.feature_subsample < 1
        ):
            raise ValueError("feature_subsample must be a positive count or 'all'")


@dataclass(eq=False)
class Leaf:
    totals: np.ndarray  # weighted class totals U_k at fit time
    counts: np.ndarray  # raw class counts at fit time
    sample_ids: np.ndarray

    def majority(self) -> int:
        return int(np.argmax(self.counts))


@dataclass(eq=False)
class Split:
    feature: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Split]


@dataclass
class BestSplit:
    feature: int
    threshold: float
    decrease: float


def find_best_split(X, y, w, features, n_classes: int, criterion: str = "gini", backend=None) -> BestSplit | None:
    """Best threshold split of one node over the candidate ``features``.

    Thresholds are midpoints of adjacent distinct values.  Ties keep the
    lower feature index, then the smaller threshold.  Returns ``None`` when
    no candidate feature takes two distinct values or when the node is
    already pure; zero-decrease splits of impure nodes are returned (an XOR
    layout has no first split that lowers impurity).
    """
    impl = backend or splitter
    X = np.asarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    totals = _class_totals(y, w, n_classes)
    weight = _sum_in_order(totals)
    crit = CRITERIA[criterion]
    log_k = math.log(n_classes)
    if impl.node_impurity(totals, weight, crit, log_k) <= 0.0:
        return None
    feats = np.sort(np.asarray(features, dtype=np.int64))
    f, t, d = impl.best_split(X, y, w, feats, totals, weight, crit, log_k)
    if f < 0:
        return None
    return BestSplit(int(f), float(t), float(d))


def _class_totals(y, w, n_classes):
    return np.bincount(y, weights=w, minlength=n_classes).astype(np.float64)


def _sum_in_order(totals) -> float:
    s = 0.0
    for v in totals:
        s = s + float(v)
    return s


def fit_tree(dataset: Dataset, sample_weights=None, params: TreeParams | None = None, backend=None) -> TreeNode:
    """Grow a tree on ``dataset`` with nonnegative per-sample weights.

    Samples with zero weight take no part in the fit.  Growth stops at
    ``max_depth``, at pure nodes, at nodes with fewer than
    ``min_samples_split`` samples, and when no split exists.
    """
    params = params or TreeParams()
    m = dataset.m
    w = np.ones(m) if sample_weights is None else np.asarray(sample_weights, dtype=np.float64)
    if w.shape != (m,):
        raise ValueError(f"sample_weights must have length {m}")
    if np.any(w < 0) or not np.any(w > 0) or not np.all(np.isfinite(w)):
        raise ValueError("sample weights must be finite, nonnegative and not all zero")

    impl = backend or splitter
    X = dataset.features
    y = dataset.labels
    K = dataset.K
    crit = CRITERIA[params.criterion]
    log_k = math.log(K)
    rng = np.random.default_rng(params.seed)
    n_sub = dataset.p if params.feature_subsample == "all" else min(int(params.feature_subsample), dataset.p)

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        yi = y[idx]
        wi = w[idx]
        totals = _class_totals(yi, wi, K)
        counts = np.bincount(yi, minlength=K)
        leaf = Leaf(totals, counts, idx)
        if depth >= params.max_depth or idx.size < params.min_samples_split or np.count_nonzero(counts) <= 1:
            return leaf
        weight = _sum_in_order(totals)
        Xi = X[idx]
        if n_sub == dataset.p:
            f, t, _ = impl.best_split(Xi, yi, wi, np.arange(dataset.p), totals, weight, crit, log_k)
        else:
            # sample features until one of them admits a split
            perm = rng.permutation(dataset.p)
            f = -1
            start = 0
            take = n_sub
            while f < 0 and start < dataset.p:
                feats = np.sort(perm[start:start + take])
                f, t, _ = impl.best_split(Xi, yi, wi, feats, totals, weight, crit, log_k)
                start += take
                take = 1
        if f < 0:
            return leaf
        go_left = Xi[:, f] <= t
        return Split(int(f), float(t), grow(idx[go_left], depth + 1), grow(idx[~go_left], depth + 1))

    root_idx = np.flatnonzero(w > 0)
    return grow(root_idx, 0)


def leaves(node: TreeNode) -> list[Leaf]:
    """Leaves in left-to-right order."""
    out: list[Leaf] = []
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, Leaf):
            out.append(n)
        else:
            stack.append(n.right)
            stack.append(n.left)
    return out


def paths(node: TreeNode) -> list[tuple[list[tuple[int, str, float]], Leaf]]:
    """Root-to-leaf clause lists ``(feature, '<=' | '>', threshold)``, leaf order."""
    out = []

    def walk(n, clauses):
        if isinstance(n, Leaf):
            out.append((clauses, n))
            return
        walk(n.left, clauses + [(n.feature, "<=", n.threshold)])
        walk(n.right, clauses + [(n.feature, ">", n.threshold)])

    walk(node, [])
    return out


def apply(node: TreeNode, X) -> np.ndarray:
    """Leaf ordinal (index into :func:`leaves`) for every row of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.int64)
    counter = [0]

    def route(n, idx):
        if isinstance(n, Leaf):
            out[idx] = counter[0]
            counter[0] += 1
            return
        go_left = X[idx, n.feature] <= n.threshold
        route(n.left, idx[go_left])
        route(n.right, idx[~go_left])

    route(node, np.arange(X.shape[0]))
    return out


def predict_tree(node: TreeNode, X) -> np.ndarray:
    lv = leaves(node)
    majority = np.array([l.majority() for l in lv], dtype=np.int64)
    return majority[apply(node, X)]


def depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(depth(node.left), depth(node.right))


def n_leaves(node: TreeNode) -> int:
    return len(leaves(node))


def structure(node: TreeNode):
    """Hashable structural signature (splits only) used for equality checks."""
    if isinstance(node, Leaf):
        return ("leaf", tuple(int(c) for c in node.counts))
    return (node.feature, node.threshold, structure(node.left), structure(node.right))
