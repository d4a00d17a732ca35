"""External validity metrics for hardened partitions."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = ["rand_index", "matched_accuracy"]


def _as_labels(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.ndim != 1:
        raise ValueError("label vectors must be 1-D")
    return arr


def rand_index(a, b) -> float:
    """Fraction of object pairs on which two labelings agree.

    A pair agrees when both labelings co-cluster it or both separate it.
    Invariant under renaming labels on either side.
    """
    a = _as_labels(a)
    b = _as_labels(b)
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise ValueError("rand index needs at least 2 objects")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    contingency = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(contingency, (ai, bi), 1)

    def pairs(x):
        return float((x * (x - 1) // 2).sum())

    same_both = pairs(contingency)
    same_a = pairs(contingency.sum(axis=1))
    same_b = pairs(contingency.sum(axis=0))
    total = n * (n - 1) / 2
    disagreements = same_a + same_b - 2 * same_both
    return float((total - disagreements) / total)


def matched_accuracy(pred, truth) -> float:
    """Accuracy after optimally matching predicted clusters to classes.

    The confusion matrix is solved as an assignment problem, so each
    cluster maps to at most one class; surplus clusters (or classes) are
    simply left unmatched.
    """
    pred = _as_labels(pred)
    truth = _as_labels(truth)
    if len(pred) != len(truth):
        raise ValueError(f"length mismatch: {len(pred)} vs {len(truth)}")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    confusion = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(confusion, (pi, ti), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return float(confusion[rows, cols].sum()) / len(pred)
