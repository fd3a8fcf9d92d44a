"""Numpy fallback for the compiled kernels.

Semantics must match clipal.kernels._fast exactly, including tie-breaks;
tests compare the two backends element-for-element.
"""

from __future__ import annotations

import numpy as np


def entropy_rows(flat: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Entropy of each ragged row of probabilities.

    ``flat`` concatenates the rows; ``offsets`` (length n_rows + 1,
    strictly increasing) delimits them. Zero entries contribute 0.
    """
    flat = np.ascontiguousarray(flat, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    n_rows = len(offsets) - 1
    if n_rows <= 0:
        return np.zeros(0, dtype=np.float64)
    terms = np.zeros_like(flat)
    pos = flat > 0.0
    terms[pos] = -flat[pos] * np.log(flat[pos])
    return np.add.reduceat(terms, offsets[:-1])


def pairwise_iou(boxes_a: np.ndarray, boxes_b: np.ndarray) -> np.ndarray:
    """IoU matrix between two (n, 4) box arrays in (x0, y0, x1, y1) order."""
    a = np.ascontiguousarray(boxes_a, dtype=np.float64).reshape(-1, 4)
    b = np.ascontiguousarray(boxes_b, dtype=np.float64).reshape(-1, 4)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]), dtype=np.float64)
    x0 = np.maximum(a[:, None, 0], b[None, :, 0])
    y0 = np.maximum(a[:, None, 1], b[None, :, 1])
    x1 = np.minimum(a[:, None, 2], b[None, :, 2])
    y1 = np.minimum(a[:, None, 3], b[None, :, 3])
    inter = np.maximum(0.0, x1 - x0) * np.maximum(0.0, y1 - y0)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return np.where(union > 0.0, inter / np.where(union > 0.0, union, 1.0), 0.0)


def greedy_match(iou: np.ndarray, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Greedy one-to-one matching on an IoU matrix.

    Repeatedly takes the unmatched (i, j) with the highest IoU >= tau,
    ties broken by lower i then lower j (argmax scans row-major, which
    realizes exactly that order). Returns matched index pairs in pick
    order plus their IoU values.
    """
    work = np.array(iou, dtype=np.float64, copy=True)
    if work.ndim != 2:
        raise ValueError("iou matrix must be 2-D")
    pairs = []
    ious = []
    limit = min(work.shape)
    for _ in range(limit):
        flat_idx = int(np.argmax(work))
        i, j = divmod(flat_idx, work.shape[1])
        best = work[i, j]
        if best < tau:
            break
        pairs.append((i, j))
        ious.append(best)
        work[i, :] = -1.0
        work[:, j] = -1.0
    if not pairs:
        return np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.float64)
    return np.array(pairs, dtype=np.int64), np.array(ious, dtype=np.float64)
