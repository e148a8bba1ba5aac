"""Compare the compiled and pure-Python split-search kernels.

    python benchmarks/bench_splitter.py [--repeat 5]

Times ``fit_tree`` and a single root ``best_split`` call on synthetic data
of several sizes with each backend and checks that both grow the same tree.
"""

import argparse
import time

import numpy as np

from ruleforge import splitter
from ruleforge.dataset import Dataset
from ruleforge.tree import TreeParams, fit_tree, structure

SIZES = [(200, 4), (1000, 8), (5000, 8)]


def _data(m, p, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(m, p)).round(2)
    y = (X[:, 0] + X[:, 1] ** 2 + 0.5 * rng.normal(size=m) > 1).astype(int)
    y[:2] = [0, 1]
    return Dataset.from_arrays(X, y), rng.uniform(0.5, 2.0, size=m)


def _best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--depth", type=int, default=8)
    args = ap.parse_args(argv)

    names = ["python"] + (["cython"] if splitter.compiled is not None else [])
    if len(names) == 1:
        print("compiled kernel not built; timing the Python kernel only")
    print(f"{'m':>6} {'p':>3} {'kernel':>8} {'root split ms':>14} {'fit_tree ms':>12} {'speedup':>8}")
    for m, p in SIZES:
        ds, w = _data(m, p)
        feats = np.arange(p, dtype=np.int64)
        y = ds.labels.astype(np.int64)
        totals = np.bincount(y, weights=w, minlength=ds.K).astype(np.float64)
        weight = float(sum(totals))
        times, trees = {}, {}
        for name in names:
            kern = splitter.get_backend(name)
            t_split, _ = _best_of(lambda: kern.best_split(ds.features, y, w, feats, totals, weight, 0, np.log(2)), args.repeat)
            t_fit, tree = _best_of(lambda: fit_tree(ds, w, TreeParams(max_depth=args.depth), backend=kern), args.repeat)
            times[name] = (t_split, t_fit)
            trees[name] = structure(tree)
        for name in names:
            t_split, t_fit = times[name]
            speed = times["python"][1] / t_fit
            print(f"{m:>6} {p:>3} {name:>8} {1e3 * t_split:>14.2f} {1e3 * t_fit:>12.2f} {speed:>7.1f}x")
        if len(names) == 2 and trees["python"] != trees["cython"]:
            raise SystemExit(f"kernels grew different trees at m={m}, p={p}")


if __name__ == "__main__":
    main()
