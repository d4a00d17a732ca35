"""Shared oracles: small, slow, independent reference implementations
that the fast library code is tested against."""

import numpy as np


def brute_dtw(x, y):
    """Classic dynamic time warping by exhaustive DP (hard min)."""
    x = np.atleast_2d(np.asarray(x, dtype=float).T).T
    y = np.atleast_2d(np.asarray(y, dtype=float).T).T
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    tx, ty = x.shape[0], y.shape[0]
    D = np.full((tx + 1, ty + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, tx + 1):
        for j in range(1, ty + 1):
            cost = float(((x[i - 1] - y[j - 1]) ** 2).sum())
            D[i, j] = cost + min(D[i - 1, j], D[i, j - 1], D[i - 1, j - 1])
    return D[tx, ty]


def finite_diff_grad(f, x, step=1e-5):
    """Central finite differences of a scalar function on a flat array."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    flat = g.reshape(-1)
    xflat = x.reshape(-1)
    for k in range(xflat.size):
        xp = x.copy().reshape(-1)
        xm = x.copy().reshape(-1)
        xp[k] += step
        xm[k] -= step
        flat[k] = (f(xp.reshape(x.shape)) - f(xm.reshape(x.shape))) / (2 * step)
    return g


def relative_error(approx, exact):
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    denom = max(float(np.linalg.norm(exact)), 1e-12)
    return float(np.linalg.norm(approx - exact)) / denom


def rand_index_pairs(a, b):
    """Rand index by explicit enumeration of all object pairs."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = len(a)
    agree = 0
    total = 0
    for i in range(n):
        for j in range(i + 1, n):
            total += 1
            if (a[i] == a[j]) == (b[i] == b[j]):
                agree += 1
    return agree / total


def brute_matched_accuracy(pred, truth):
    """Best accuracy over all injective cluster-to-class mappings."""
    from itertools import permutations

    pred = np.asarray(pred)
    truth = np.asarray(truth)
    pred_labels = sorted(set(pred.tolist()))
    true_labels = sorted(set(truth.tolist()))
    k = max(len(pred_labels), len(true_labels))
    padded_true = true_labels + [None] * (k - len(true_labels))
    best = 0
    for perm in permutations(padded_true, len(pred_labels)):
        mapping = dict(zip(pred_labels, perm))
        correct = sum(
            1 for p, t in zip(pred, truth) if mapping[p] is not None and mapping[p] == t
        )
        best = max(best, correct)
    return best / len(pred)


def random_simplex_rows(rng, n, k):
    """Uniform random points on the k-simplex, one per row."""
    g = rng.exponential(size=(n, k))
    return g / g.sum(axis=1, keepdims=True)
