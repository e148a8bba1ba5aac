# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled split search; same contract and arithmetic order as _splitter_py."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, INFINITY

cnp.import_array()

GINI = 0
ENTROPY = 1


cdef double _impurity(const double[::1] tot, double weight, int criterion, double log_k) noexcept nogil:
    cdef Py_ssize_t k
    cdef double pk, s = 0.0
    if criterion == 0:
        for k in range(tot.shape[0]):
            pk = tot[k] / weight
            s = s + pk * pk
        return 1.0 - s
    for k in range(tot.shape[0]):
        pk = tot[k] / weight
        if pk > 0.0:
            s = s - pk * log(pk)
    return s / log_k


def node_impurity(totals, double weight, int criterion, double log_k):
    cdef double[::1] tot = np.ascontiguousarray(totals, dtype=np.float64)
    return _impurity(tot, weight, criterion, log_k)


def best_split(const double[:, :] X, const cnp.int64_t[::1] y, const double[::1] w, features,
               const double[::1] totals, double weight, int criterion, double log_k):
    """Best axis-aligned split of one node; see _splitter_py.best_split."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t n_classes = totals.shape[0]
    cdef Py_ssize_t i, k, f, o, o_next
    cdef double parent = _impurity(totals, weight, criterion, log_k)
    cdef double wl, wr, dec, t, best_d = -INFINITY, best_t = 0.0
    cdef Py_ssize_t best_f = -1
    cdef double[::1] left = np.empty(n_classes, dtype=np.float64)
    cdef double[::1] right = np.empty(n_classes, dtype=np.float64)
    cdef cnp.intp_t[::1] order
    cdef const double[::1] col

    if n < 2:
        return best_f, best_t, best_d
    for f in features:
        col = np.ascontiguousarray(X[:, f])
        order = np.argsort(col, kind="stable")
        for k in range(n_classes):
            left[k] = 0.0
        wl = 0.0
        for i in range(n - 1):
            o = order[i]
            o_next = order[i + 1]
            left[y[o]] += w[o]
            wl = wl + w[o]
            if not (col[o] < col[o_next]):
                continue
            wr = weight - wl
            if wl <= 0.0 or wr <= 0.0:
                continue
            for k in range(n_classes):
                right[k] = totals[k] - left[k]
            dec = parent - (wl / weight) * _impurity(left, wl, criterion, log_k) \
                - (wr / weight) * _impurity(right, wr, criterion, log_k)
            if dec > best_d:
                best_d = dec
                best_f = f
                t = 0.5 * (col[o] + col[o_next])
                best_t = col[o] if t >= col[o_next] else t
    return int(best_f), float(best_t), float(best_d)
