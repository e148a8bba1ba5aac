"""Tabular classification data: CSV loading, ordinal encoding and
stratified (nested) cross-validation folds."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np


class DataError(ValueError):
    """Raised for unreadable or malformed input data."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric feature matrix with integer class labels.

    ``labels`` hold class indices in ``[0, K)``.  ``metadata`` carries the
    encoding maps produced by :func:`load_csv` so new rows can be encoded
    identically (see :meth:`encode_row`).
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        X = np.ascontiguousarray(self.features, dtype=np.float64)
        y = np.ascontiguousarray(self.labels, dtype=np.int64)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"features must be a non-empty 2-D matrix, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(f"labels length {y.shape} does not match {X.shape[0]} samples")
        if len(self.feature_names) != X.shape[1]:
            raise DataError("feature_names length does not match feature count")
        if len(self.class_names) < 2:
            raise DataError("at least two classes are required")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain missing or non-finite values")
        if y.min() < 0 or y.max() >= len(self.class_names):
            raise DataError("labels must lie in [0, K)")

    @classmethod
    def from_arrays(cls, X, y, feature_names=None, class_names=None, *, require_all_classes=True):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim == 1:
            X = X[:, None]
        if feature_names is None:
            feature_names = [f"x{j}" for j in range(X.shape[1])]
        if class_names is None:
            n_classes = max(int(y.max()) + 1, 2) if y.size else 2
            class_names = [str(k) for k in range(n_classes)]
        ds = cls(X, y, feature_names, class_names)
        if require_all_classes:
            missing = set(range(ds.K)) - set(np.unique(ds.labels).tolist())
            if missing:
                raise DataError(f"classes {sorted(missing)} have no samples")
        return ds

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def K(self) -> int:
        return len(self.class_names)

    def subset(self, indices) -> "Dataset":
        """Rows ``indices`` as a new dataset with the same class set.

        Subsets may lack some classes (a small test fold, for instance), so
        the every-class-present check of :meth:`from_arrays` is not applied.
        """
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.features[idx], self.labels[idx], self.feature_names, self.class_names, self.metadata
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)

    def encode_row(self, row: Mapping[str, str]) -> np.ndarray:
        """Encode one raw CSV row (column name -> string) with the stored maps."""
        encodings = self.metadata.get("encodings", {})
        out = np.empty(self.p, dtype=np.float64)
        for j, name in enumerate(self.feature_names):
            raw = row[name].strip()
            cats = encodings.get(name)
            if cats is None:
                out[j] = float(raw)
            else:
                try:
                    out[j] = cats.index(raw)
                except ValueError:
                    raise DataError(f"unknown category {raw!r} for column {name!r}") from None
        return out

    def characteristics(self) -> dict:
        return {"m": self.m, "p": self.p, "K": self.K}


def _parse_float(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def load_csv(path, label_column: str | int) -> Dataset:
    """Load a headered CSV file into a :class:`Dataset`.

    Columns whose every value parses as a number are kept numeric.  Columns
    with no numeric values are ordinally encoded: the distinct strings are
    sorted lexicographically and mapped to 0, 1, 2, ...  Labels are mapped to
    class indices in order of first appearance.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")

    if isinstance(label_column, int) or (isinstance(label_column, str) and label_column.lstrip("-").isdigit() and label_column not in header):
        li = int(label_column)
        if not -len(header) <= li < len(header):
            raise DataError(f"{path}: label column index {li} out of range")
        li %= len(header)
    else:
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not in header {header}")
        li = header.index(label_column)

    for n, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise DataError(f"{path}: line {n} has {len(r)} fields, expected {len(header)}")

    label_raw = [r[li].strip() for r in body]
    class_names: list[str] = []
    class_index: dict[str, int] = {}
    for v in label_raw:
        if v not in class_index:
            class_index[v] = len(class_names)
            class_names.append(v)
    if len(class_names) < 2:
        raise DataError(f"{path}: label column needs at least 2 distinct values")
    y = np.array([class_index[v] for v in label_raw], dtype=np.int64)

    feature_cols = [j for j in range(len(header)) if j != li]
    X = np.empty((len(body), len(feature_cols)), dtype=np.float64)
    encodings: dict[str, list[str]] = {}
    for out_j, j in enumerate(feature_cols):
        raw = [r[j].strip() for r in body]
        if any(v == "" for v in raw):
            raise DataError(f"{path}: column {header[j]!r} has missing values")
        parsed = [_parse_float(v) for v in raw]
        n_numeric = sum(v is not None for v in parsed)
        if n_numeric == len(raw):
            col = np.array(parsed, dtype=np.float64)
            if not np.all(np.isfinite(col)):
                raise DataError(f"{path}: column {header[j]!r} has non-finite values")
            X[:, out_j] = col
        elif n_numeric == 0:
            cats = sorted(set(raw))
            lookup = {c: i for i, c in enumerate(cats)}
            X[:, out_j] = [lookup[v] for v in raw]
            encodings[header[j]] = cats
        else:
            bad = next(v for v, q in zip(raw, parsed) if q is None)
            raise DataError(
                f"{path}: column {header[j]!r} mixes numeric and non-numeric values (e.g. {bad!r})"
            )

    meta = {
        "source": str(path),
        "label_column": header[li],
        "encodings": encodings,
        "class_map": {name: i for i, name in enumerate(class_names)},
    }
    return Dataset(X, y, [header[j] for j in feature_cols], class_names, meta)


def save_csv(dataset: Dataset, path, label_name: str = "class") -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*dataset.feature_names, label_name])
        for x, k in zip(dataset.features, dataset.labels):
            w.writerow([repr(float(v)) for v in x] + [dataset.class_names[k]])


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Stratified fold assignment of every sample to one outer fold."""

    outer_folds: int
    inner_folds: int
    assignments: np.ndarray
    seed: int

    def train_test(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.flatnonzero(self.assignments == fold)
        train = np.flatnonzero(self.assignments != fold)
        return train, test

    def __iter__(self):
        for f in range(self.outer_folds):
            yield self.train_test(f)


def stratified_kfold(dataset: Dataset, k: int, seed: int = 0, inner_folds: int = 0) -> FoldPlan:
    """Assign samples to ``k`` stratified folds.

    Members of each class are shuffled and dealt round-robin; the dealing
    position carries over from one class to the next, so fold sizes differ
    by at most one.  Classes with fewer than ``k`` members are simply spread
    over the first available folds.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > dataset.m:
        raise ValueError(f"k={k} exceeds the number of samples m={dataset.m}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(dataset.m, dtype=np.int64)
    offset = 0
    for c in range(dataset.K):
        members = np.flatnonzero(dataset.labels == c)
        members = members[rng.permutation(members.size)]
        assignments[members] = (offset + np.arange(members.size)) % k
        offset = (offset + members.size) % k
    assignments.setflags(write=False)
    return FoldPlan(k, inner_folds, assignments, seed)


def expand_grid(grid: Mapping[str, Sequence]) -> list[dict]:
    keys = list(grid)
    return [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]


@dataclass
class GridResult:
    best_params: dict
    best_score: float
    scores: list[tuple[dict, float]]
    trace: list[dict]


class FoldError(RuntimeError):
    """A trainer failed on one fold of a grid search."""


def grid_search(
    dataset: Dataset,
    grid: Mapping[str, Sequence],
    folds: FoldPlan,
    trainer: str | Callable,
    seed: int | None = None,
) -> GridResult:
    """Pick the grid combination with the best mean accuracy over ``folds``.

    ``trainer`` is an algorithm id (see :data:`ruleforge.experiment.TRAINERS`)
    or a callable ``trainer(train, test, params, seed) -> accuracy``.  Ties
    go to the combination that comes first in grid order.
    """
    combos = expand_grid(grid)
    if not combos:
        raise ValueError("grid is empty")
    if isinstance(trainer, str):
        from .experiment import TRAINERS

        try:
            fn = TRAINERS[trainer]
        except KeyError:
            raise ValueError(f"unknown trainer {trainer!r}; choose from {sorted(TRAINERS)}") from None
    else:
        fn = trainer
    base = folds.seed if seed is None else seed

    trace = []
    scores = []
    for params in combos:
        accs = []
        for f in range(folds.outer_folds):
            tr, te = folds.train_test(f)
            try:
                acc = float(fn(dataset.subset(tr), dataset.subset(te), params, base + f))
            except Exception as exc:
                raise FoldError(f"trainer failed on fold {f} with params {params}: {exc}") from exc
            accs.append(acc)
            trace.append({"params": dict(params), "fold": f, "accuracy": acc})
        scores.append((params, float(np.mean(accs))))

    best_params, best_score = scores[0]
    for params, score in scores[1:]:
        if score > best_score:
            best_params, best_score = params, score
    return GridResult(dict(best_params), best_score, scores, trace)


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation; std is NaN for fewer than 2 values."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return math.nan, math.nan
    std = float(arr.std(ddof=1)) if arr.size >= 2 else math.nan
    return float(arr.mean()), std
