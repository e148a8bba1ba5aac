"""Rules as axis-aligned boxes: extraction from trees, deduplication,
coverage sets and majority-vote classification."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cover import CoverProblem
from .dataset import Dataset
from .tree import TreeNode, apply, paths, weighted_impurity

INF = math.inf


class MissError(LookupError):
    """No rule accepts the point and the fallback is disabled."""


@dataclass(frozen=True)
class Clause:
    feature: int
    op: str  # "<=" or ">"
    threshold: float

    def __post_init__(self):
        if self.op not in ("<=", ">"):
            raise ValueError(f"unknown clause operator {self.op!r}")
        if not math.isfinite(self.threshold):
            raise ValueError("clause threshold must be finite")


Bounds = tuple[tuple[int, float, float], ...]


def canonical_bounds(clauses: Iterable[Clause | tuple]) -> Bounds:
    """Merge clauses into per-feature half-open intervals ``(lo, hi]``.

    The tightest bound per side is kept and the result is sorted by feature,
    so clause order does not matter.
    """
    lo: dict[int, float] = {}
    hi: dict[int, float] = {}
    for c in clauses:
        f, op, t = (c.feature, c.op, c.threshold) if isinstance(c, Clause) else c
        Clause(int(f), op, float(t))
        if op == "<=":
            hi[f] = min(hi.get(f, INF), float(t))
        else:
            lo[f] = max(lo.get(f, -INF), float(t))
    feats = sorted(set(lo) | set(hi))
    return tuple((int(f), lo.get(f, -INF), hi.get(f, INF)) for f in feats)


@dataclass(eq=False)
class Rule:
    bounds: Bounds
    class_counts: np.ndarray
    impurity: float
    covered_ids: np.ndarray | None = None
    provenance: str = ""

    @property
    def key(self) -> Bounds:
        return self.bounds

    @property
    def n_clauses(self) -> int:
        return sum(math.isfinite(lo) + math.isfinite(hi) for _, lo, hi in self.bounds)

    @property
    def cost(self) -> float:
        return 1.0 + self.impurity

    @property
    def majority(self) -> int:
        return int(np.argmax(self.class_counts))

    def clauses(self) -> list[Clause]:
        out = []
        for f, lo, hi in self.bounds:
            if math.isfinite(lo):
                out.append(Clause(f, ">", lo))
            if math.isfinite(hi):
                out.append(Clause(f, "<=", hi))
        return out

    def mask(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        ok = np.ones(X.shape[0], dtype=bool)
        for f, lo, hi in self.bounds:
            col = X[:, f]
            ok &= (col > lo) & (col <= hi)
        return ok

    def clause_hits(self, X) -> np.ndarray:
        """Number of satisfied clauses per row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        hits = np.zeros(X.shape[0], dtype=np.int64)
        for f, lo, hi in self.bounds:
            col = X[:, f]
            if math.isfinite(lo):
                hits += col > lo
            if math.isfinite(hi):
                hits += col <= hi
        return hits


def satisfies(rule: Rule, x) -> bool:
    """True iff ``x`` lies inside every interval of ``rule``."""
    x = np.asarray(x, dtype=np.float64)
    for f, lo, hi in rule.bounds:
        if not (lo < x[f] <= hi):
            return False
    return True


def evaluate_rule(bounds: Bounds, dataset: Dataset, criterion: str = "gini", provenance: str = "") -> Rule:
    """Recompute counts, impurity and covered ids of ``bounds`` on ``dataset``."""
    probe = Rule(bounds, np.zeros(dataset.K, dtype=np.int64), 0.0)
    ids = np.flatnonzero(probe.mask(dataset.features))
    return _rule_from_ids(bounds, ids, dataset, criterion, provenance)


def _rule_from_ids(bounds, ids, dataset, criterion, provenance):
    counts = np.bincount(dataset.labels[ids], minlength=dataset.K)
    imp = weighted_impurity(counts, criterion) if ids.size else 0.0
    return Rule(bounds, counts, imp, ids, provenance)


def extract_rules(tree: TreeNode, dataset: Dataset, criterion: str = "gini", provenance: str = "") -> list[Rule]:
    """One rule per leaf of ``tree`` that covers at least one sample of ``dataset``.

    Counts, impurity and covered ids are computed on ``dataset`` (the full
    training set, not the bootstrap sample the tree was grown on).
    """
    tree_paths = paths(tree)
    which = apply(tree, dataset.features)
    order = np.argsort(which, kind="stable")
    starts = np.searchsorted(which[order], np.arange(len(tree_paths) + 1))
    out = []
    for j, (clauses, _leaf) in enumerate(tree_paths):
        ids = order[starts[j]:starts[j + 1]]
        if ids.size == 0:
            continue
        tag = f"{provenance}leaf:{j}" if provenance else f"leaf:{j}"
        out.append(_rule_from_ids(canonical_bounds(clauses), np.sort(ids), dataset, criterion, tag))
    return out


@dataclass(eq=False)
class RulePool:
    rules: list[Rule]
    n_classes: int
    criterion: str = "gini"
    feature_names: tuple[str, ...] = ()
    class_names: tuple[str, ...] = ()
    _counts: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def keys(self) -> list[Bounds]:
        return [r.key for r in self.rules]

    def counts_matrix(self) -> np.ndarray:
        if self._counts is None or self._counts.shape[0] != len(self.rules):
            self._counts = np.array([r.class_counts for r in self.rules], dtype=np.float64).reshape(
                len(self.rules), self.n_classes
            )
        return self._counts

    def membership(self, X) -> np.ndarray:
        """Boolean matrix ``(n_points, n_rules)``: rule j accepts point i."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        M = np.empty((X.shape[0], len(self.rules)), dtype=bool)
        for j, r in enumerate(self.rules):
            M[:, j] = r.mask(X)
        return M

    def extend(self, rules: Iterable[Rule]) -> int:
        """Append rules whose boxes are not yet present; returns how many were added."""
        seen = set(self.keys())
        added = 0
        for r in rules:
            if r.key not in seen:
                seen.add(r.key)
                self.rules.append(r)
                added += 1
        self._counts = None
        return added


def dedup(rules: Sequence[Rule] | RulePool, n_classes: int | None = None, criterion: str | None = None) -> RulePool:
    """Collapse rules with identical boxes, keeping the first occurrence.

    Thresholds are compared exactly; nearly equal boxes stay distinct.
    """
    if isinstance(rules, RulePool):
        base = rules
        items = rules.rules
        n_classes = base.n_classes
        criterion = base.criterion
        extra = {"feature_names": base.feature_names, "class_names": base.class_names}
    else:
        items = list(rules)
        if n_classes is None:
            if not items:
                raise ValueError("n_classes is required for an empty rule list")
            n_classes = len(items[0].class_counts)
        extra = {}
    pool = RulePool([], n_classes, criterion or "gini", **extra)
    pool.extend(items)
    return pool


def build_coverage(pool: RulePool | Sequence[Rule], dataset: Dataset | int, recompute: bool = False) -> CoverProblem:
    """Covering instance of ``pool`` over the samples of ``dataset``.

    Stored covered ids are used when every rule has them (they were computed
    on this dataset); with ``recompute`` or missing ids, coverage is taken
    from the boxes.  ``dataset`` may also be a plain sample count when the
    ids are stored.  Costs are ``1 + impurity``.
    """
    rules = pool.rules if isinstance(pool, RulePool) else list(pool)
    m = dataset if isinstance(dataset, int) else dataset.m
    if recompute or any(r.covered_ids is None for r in rules):
        if isinstance(dataset, int):
            raise ValueError("rules without covered ids need a dataset")
        covered = [np.flatnonzero(r.mask(dataset.features)) for r in rules]
    else:
        covered = [np.asarray(r.covered_ids, dtype=np.int64) for r in rules]
    costs = np.array([1.0 + r.impurity for r in rules], dtype=np.float64)
    return CoverProblem(m, costs, covered)


def _vote(counts: np.ndarray, M: np.ndarray) -> np.ndarray:
    return np.argmax(M.astype(np.float64) @ counts, axis=1)


def predict_many(pool: RulePool, X, fallback: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Classify every row of ``X`` by summed class counts of accepting rules.

    Rows accepted by no rule are flagged as missed.  With ``fallback`` they
    are classified by the rules with the largest fraction of satisfied
    clauses (joint vote among all rules attaining it); without it a
    :class:`MissError` is raised.  Class ties go to the lowest index.
    """
    if len(pool) == 0:
        raise ValueError("rule pool is empty")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    counts = pool.counts_matrix()
    M = pool.membership(X)
    missed = ~M.any(axis=1)
    pred = _vote(counts, M)
    if missed.any():
        if not fallback:
            first = int(np.flatnonzero(missed)[0])
            raise MissError(f"point {first} is accepted by no rule")
        Xm = X[missed]
        frac = np.empty((Xm.shape[0], len(pool)))
        for j, r in enumerate(pool.rules):
            n = r.n_clauses
            frac[:, j] = r.clause_hits(Xm) / n if n else 1.0
        best = frac == frac.max(axis=1, keepdims=True)
        pred[missed] = _vote(counts, best)
    return pred, missed


def predict(pool: RulePool, x, fallback: bool = True) -> tuple[int, bool]:
    """Class of a single point and whether it was missed by every rule."""
    pred, missed = predict_many(pool, np.asarray(x, dtype=np.float64)[None, :], fallback)
    return int(pred[0]), bool(missed[0])


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def format_rule(rule: Rule, feature_names: Sequence[str] | None = None) -> str:
    """One-line text form, e.g.
    ``IF x3 <= 0.520000 AND x1 > -1.400000 THEN class=1 counts=[12,3] impurity=0.320000``.
    """
    parts = []
    for f, lo, hi in rule.bounds:
        name = feature_names[f] if feature_names else f"x{f}"
        if math.isfinite(lo):
            parts.append(f"{name} > {_fmt(lo)}")
        if math.isfinite(hi):
            parts.append(f"{name} <= {_fmt(hi)}")
    cond = " AND ".join(parts) if parts else "TRUE"
    counts = ",".join(str(int(c)) for c in rule.class_counts)
    return f"IF {cond} THEN class={rule.majority} counts=[{counts}] impurity={_fmt(rule.impurity)}"


def export_rules(pool: RulePool, feature_names: Sequence[str] | None = None) -> str:
    """Text export, one rule per line, sorted by (impurity, rule id)."""
    order = sorted(range(len(pool)), key=lambda j: (pool.rules[j].impurity, j))
    return "".join(format_rule(pool.rules[j], feature_names) + "\n" for j in order)


def _bound_to_json(v: float):
    return None if math.isinf(v) else v


def pool_to_dict(pool: RulePool) -> dict:
    return {
        "schema": 1,
        "kind": "rulepool",
        "criterion": pool.criterion,
        "n_classes": pool.n_classes,
        "feature_names": list(pool.feature_names),
        "class_names": list(pool.class_names),
        "rules": [
            {
                "bounds": [[f, _bound_to_json(lo), _bound_to_json(hi)] for f, lo, hi in r.bounds],
                "counts": [int(c) for c in r.class_counts],
                "impurity": r.impurity,
                "provenance": r.provenance,
            }
            for r in pool.rules
        ],
    }


def pool_from_dict(data: dict) -> RulePool:
    if data.get("kind") != "rulepool":
        raise ValueError("not a serialized rule pool")
    rules = []
    for item in data["rules"]:
        bounds = tuple(
            (int(f), -INF if lo is None else float(lo), INF if hi is None else float(hi))
            for f, lo, hi in item["bounds"]
        )
        rules.append(Rule(bounds, np.array(item["counts"], dtype=np.int64), float(item["impurity"]), None, item.get("provenance", "")))
    return RulePool(
        rules,
        int(data["n_classes"]),
        data.get("criterion", "gini"),
        tuple(data.get("feature_names", ())),
        tuple(data.get("class_names", ())),
    )


def save_pool(pool: RulePool, path) -> None:
    Path(path).write_text(json.dumps(pool_to_dict(pool), indent=1) + "\n", encoding="utf-8")


def load_pool(path) -> RulePool:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read model file {path}: {exc}") from exc
    if data.get("kind") == "model":
        data = data["pool"]
    return pool_from_dict(data)
