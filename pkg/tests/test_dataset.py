import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruleforge.dataset import (
    DataError,
    Dataset,
    FoldError,
    grid_search,
    load_csv,
    stratified_kfold,
)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_first_appearance_labels(tmp_path):
    ds = load_csv(write(tmp_path, "a,b,label\n1,2,yes\n3,4,no\n5,6,yes\n"), "label")
    assert (ds.m, ds.p, ds.K) == (3, 2, 2)
    assert ds.labels.tolist() == [0, 1, 0]
    assert ds.class_names == ("yes", "no")


def test_load_csv_ordinal_encoding(tmp_path):
    ds = load_csv(write(tmp_path, "color,v,y\nred,1,a\nblue,2,b\nred,3,a\n"), "y")
    assert ds.features[:, 0].tolist() == [1.0, 0.0, 1.0]
    assert ds.metadata["encodings"]["color"] == ["blue", "red"]


def test_load_csv_label_by_index(tmp_path):
    ds = load_csv(write(tmp_path, "y,a\nA,1\nB,2\n"), 0)
    assert ds.feature_names == ("a",)
    assert ds.labels.tolist() == [0, 1]


def test_encode_row_round_trip(tmp_path):
    ds = load_csv(write(tmp_path, "color,v,y\nred,1.5,a\nblue,2,b\n"), "y")
    for i, row in enumerate([{"color": "red", "v": "1.5"}, {"color": "blue", "v": "2"}]):
        assert np.array_equal(ds.encode_row(row), ds.features[i])


@pytest.mark.parametrize(
    "text,label,match",
    [
        ("a,y\n1,A\n2,A\n", "y", "2 distinct"),
        ("a,y\n", "y", "no data rows"),
        ("a,y\n1,A\n2,B\n", "z", "not in header"),
        ("a,y\n1,A\nred,B\n", "y", "mixes numeric"),
        ("a,y\n1,A\n,B\n", "y", "missing"),
        ("a,y\n1,A\ninf,B\n", "y", "non-finite"),
    ],
)
def test_load_csv_errors(tmp_path, text, label, match):
    with pytest.raises(DataError, match=match):
        load_csv(write(tmp_path, text), label)


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_csv(tmp_path / "nope.csv", "y")


def test_dataset_rejects_out_of_range_labels():
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), np.array([0, 2]), ["x"], ["a", "b"])


def test_from_arrays_requires_every_class():
    with pytest.raises(DataError, match="no samples"):
        Dataset.from_arrays(np.zeros((2, 1)), [0, 0], class_names=["a", "b"])


def test_kfold_exact_stratification():
    ds = Dataset.from_arrays(np.arange(10.0), [0] * 5 + [1] * 5)
    plan = stratified_kfold(ds, 5, seed=3)
    for f in range(5):
        _, test = plan.train_test(f)
        assert sorted(ds.labels[test].tolist()) == [0, 1]


def test_kfold_leave_one_out():
    ds = Dataset.from_arrays(np.arange(7.0), [0, 1, 0, 1, 0, 1, 1])
    plan = stratified_kfold(ds, 7)
    assert sorted(np.bincount(plan.assignments).tolist()) == [1] * 7


def test_kfold_deterministic():
    ds = Dataset.from_arrays(np.arange(30.0), [0, 1, 2] * 10)
    a = stratified_kfold(ds, 4, seed=9)
    b = stratified_kfold(ds, 4, seed=9)
    assert np.array_equal(a.assignments, b.assignments)


def test_kfold_too_many_folds():
    ds = Dataset.from_arrays(np.arange(3.0), [0, 1, 0])
    with pytest.raises(ValueError):
        stratified_kfold(ds, 4)


@settings(max_examples=60, deadline=None)
@given(
    counts=st.lists(st.integers(1, 25), min_size=2, max_size=5),
    k=st.integers(2, 10),
    seed=st.integers(0, 2**16),
)
def test_kfold_stratification_property(counts, k, seed):
    y = np.repeat(np.arange(len(counts)), counts)
    if k > y.size:
        return
    ds = Dataset.from_arrays(np.arange(y.size, dtype=float), y)
    plan = stratified_kfold(ds, k, seed)
    assert sorted(np.concatenate([plan.train_test(f)[1] for f in range(k)]).tolist()) == list(range(y.size))
    for c, mc in enumerate(counts):
        per_fold = np.bincount(plan.assignments[y == c], minlength=k)
        assert np.all(np.abs(per_fold - mc / k) <= 1)


def _toy_plan():
    ds = Dataset.from_arrays(np.arange(8.0), [0, 1] * 4)
    return ds, stratified_kfold(ds, 4, seed=0)


def test_grid_search_single_combination():
    ds, plan = _toy_plan()
    res = grid_search(ds, {"a": [7]}, plan, lambda tr, te, p, s: 0.5)
    assert res.best_params == {"a": 7}


def test_grid_search_tie_goes_to_first():
    ds, plan = _toy_plan()
    res = grid_search(ds, {"a": [1, 2, 3]}, plan, lambda tr, te, p, s: 0.9 if p["a"] != 1 else 0.1)
    assert res.best_params == {"a": 2}


def test_grid_search_trace_counts_runs():
    ds, plan = _toy_plan()
    res = grid_search(ds, {"a": [1, 2, 3], "b": [1, 2, 3]}, plan, lambda tr, te, p, s: 0.0)
    assert len(res.trace) == 36


def test_grid_search_error_names_fold():
    ds, plan = _toy_plan()

    def boom(tr, te, p, s):
        raise RuntimeError("bad")

    with pytest.raises(FoldError, match="fold 0"):
        grid_search(ds, {"a": [1]}, plan, boom)


def test_grid_search_by_trainer_id(wine):
    plan = stratified_kfold(wine, 3, seed=0)
    res = grid_search(wine, {"max_depth": [1, 3]}, plan, "dt")
    assert res.best_params == {"max_depth": 3}
    assert 0.8 < res.best_score <= 1.0
