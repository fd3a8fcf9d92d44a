# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the per-clip scoring hot path.

Mirrors clipal.kernels._py function-for-function; the numpy module is
the reference for semantics (including greedy tie-breaks).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log

cnp.import_array()


def entropy_rows(object flat_in, object offsets_in):
    """Entropy of each ragged row of probabilities."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] flat = np.ascontiguousarray(flat_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] offsets = np.ascontiguousarray(offsets_in, dtype=np.int64)
    cdef Py_ssize_t n_rows = offsets.shape[0] - 1
    if n_rows < 0:
        n_rows = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_rows, dtype=np.float64)
    cdef Py_ssize_t r, k
    cdef double acc, p
    for r in range(n_rows):
        acc = 0.0
        for k in range(offsets[r], offsets[r + 1]):
            p = flat[k]
            if p > 0.0:
                acc -= p * log(p)
        out[r] = acc
    return out


def pairwise_iou(object boxes_a, object boxes_b):
    """IoU matrix between two (n, 4) box arrays in (x0, y0, x1, y1) order."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(boxes_a, dtype=np.float64).reshape(-1, 4)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.ascontiguousarray(boxes_b, dtype=np.float64).reshape(-1, 4)
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((na, nb), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double x0, y0, x1, y1, w, h, inter, area_a, area_b, union
    for i in range(na):
        area_a = (a[i, 2] - a[i, 0]) * (a[i, 3] - a[i, 1])
        for j in range(nb):
            x0 = a[i, 0] if a[i, 0] > b[j, 0] else b[j, 0]
            y0 = a[i, 1] if a[i, 1] > b[j, 1] else b[j, 1]
            x1 = a[i, 2] if a[i, 2] < b[j, 2] else b[j, 2]
            y1 = a[i, 3] if a[i, 3] < b[j, 3] else b[j, 3]
            w = x1 - x0
            if w < 0.0:
                w = 0.0
            h = y1 - y0
            if h < 0.0:
                h = 0.0
            inter = w * h
            area_b = (b[j, 2] - b[j, 0]) * (b[j, 3] - b[j, 1])
            union = area_a + area_b - inter
            out[i, j] = inter / union if union > 0.0 else 0.0
    return out


def greedy_match(object iou_in, double tau):
    """Greedy one-to-one matching on an IoU matrix.

    Best remaining pair first, ties by lower row then lower column;
    returns pairs in pick order plus their IoU values.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] work = np.array(iou_in, dtype=np.float64, copy=True)
    cdef Py_ssize_t na = work.shape[0]
    cdef Py_ssize_t nb = work.shape[1]
    cdef Py_ssize_t limit = na if na < nb else nb
    cdef cnp.ndarray[cnp.int64_t, ndim=2] pairs = np.zeros((limit, 2), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ious = np.zeros(limit, dtype=np.float64)
    cdef Py_ssize_t n_matched = 0
    cdef Py_ssize_t i, j, bi, bj
    cdef double best
    while n_matched < limit:
        best = -2.0
        bi = -1
        bj = -1
        for i in range(na):
            for j in range(nb):
                if work[i, j] > best:
                    best = work[i, j]
                    bi = i
                    bj = j
        if best < tau:
            break
        pairs[n_matched, 0] = bi
        pairs[n_matched, 1] = bj
        ious[n_matched] = best
        n_matched += 1
        for j in range(nb):
            work[bi, j] = -1.0
        for i in range(na):
            work[i, bj] = -1.0
    return pairs[:n_matched].copy(), ious[:n_matched].copy()
