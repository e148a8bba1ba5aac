"""Pure-numpy split search; mirrors the arithmetic order of ``_splitter.pyx``."""

import math

import numpy as np

GINI = 0
ENTROPY = 1


def _impurity_rows(totals, weight, criterion, log_k):
    # totals: (n, K) class weight totals, weight: (n,) their row sums
    n_classes = totals.shape[1]
    if criterion == GINI:
        s = np.zeros(totals.shape[0])
        for k in range(n_classes):
            pk = totals[:, k] / weight
            s = s + pk * pk
        return 1.0 - s
    h = np.zeros(totals.shape[0])
    for k in range(n_classes):
        pk = totals[:, k] / weight
        # libm log, as in the compiled kernel; numpy's vector log can differ by an ulp
        logs = np.zeros_like(pk)
        pos = pk > 0.0
        logs[pos] = np.fromiter(map(math.log, pk[pos]), dtype=np.float64, count=int(pos.sum()))
        h = h - np.where(pos, pk * logs, 0.0)
    return h / log_k


def node_impurity(totals, weight, criterion, log_k):
    return float(_impurity_rows(np.asarray(totals, dtype=np.float64)[None, :], np.array([weight]), criterion, log_k)[0])


def best_split(X, y, w, features, totals, weight, criterion, log_k):
    """Best axis-aligned split of one node.

    Returns ``(feature, threshold, decrease)``; ``feature`` is -1 when no
    feature has two distinct values.  Features are scanned in the given
    order and thresholds in ascending order; only a strictly larger
    decrease replaces the incumbent.
    """
    n = X.shape[0]
    n_classes = totals.shape[0]
    parent = node_impurity(totals, weight, criterion, log_k)
    best_f, best_t, best_d = -1, 0.0, -np.inf
    if n < 2:
        return best_f, best_t, best_d
    for f in features:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y[order]] = w[order]
        left = np.cumsum(onehot, axis=0)[:-1]
        wl = np.cumsum(w[order])[:-1]
        right = totals[None, :] - left
        wr = weight - wl
        with np.errstate(divide="ignore", invalid="ignore"):
            dec = parent - (wl / weight) * _impurity_rows(left, wl, criterion, log_k) - (
                wr / weight
            ) * _impurity_rows(right, wr, criterion, log_k)
        dec = np.where(valid & (wl > 0.0) & (wr > 0.0), dec, -np.inf)
        i = int(np.argmax(dec))
        if dec[i] > best_d:
            best_d = float(dec[i])
            best_f = int(f)
            t = 0.5 * (xs[i] + xs[i + 1])
            best_t = float(xs[i] if t >= xs[i + 1] else t)
    return best_f, best_t, best_d
