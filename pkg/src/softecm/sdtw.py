"""Soft dynamic time warping kernels.

Numba-compiled forward/backward recursions for the smoothed-min alignment
cost between two multichannel series, with the analytic gradient with
respect to the second argument.  The per-frame ground cost is the squared
Euclidean distance across channels.  Batched variants loop over a padded
(n, T_max, q) stack so the clustering inner loops stay out of Python.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "softdtw_value",
    "softdtw_value_and_grad",
    "softdtw_values_batch",
    "softdtw_grads_batch",
]


@njit(cache=True)
def _softmin3(a, b, c, gamma):
    lo = min(a, min(b, c))
    s = (
        np.exp((lo - a) / gamma)
        + np.exp((lo - b) / gamma)
        + np.exp((lo - c) / gamma)
    )
    return lo - gamma * np.log(s)


@njit(cache=True)
def _forward(x, v, gamma, R):
    """Fill R (Tx+2, Ty+2) in place; returns the alignment value."""
    tx = x.shape[0]
    ty = v.shape[0]
    q = x.shape[1]
    R[:, :] = np.inf
    R[0, 0] = 0.0
    for i in range(1, tx + 1):
        for j in range(1, ty + 1):
            cost = 0.0
            for k in range(q):
                d = x[i - 1, k] - v[j - 1, k]
                cost += d * d
            R[i, j] = cost + _softmin3(R[i - 1, j - 1], R[i - 1, j], R[i, j - 1], gamma)
    return R[tx, ty]


@njit(cache=True)
def _sdtw_value(x, v, gamma):
    R = np.empty((x.shape[0] + 2, v.shape[0] + 2), dtype=np.float64)
    return _forward(x, v, gamma, R)


@njit(cache=True)
def _sdtw_value_and_grad(x, v, gamma):
    """Returns (value, grad) with grad of shape v.shape.

    Backward pass accumulates the expected-alignment matrix E and chains
    it with the per-frame cost derivative 2*(v_t - x_s).
    """
    tx = x.shape[0]
    ty = v.shape[0]
    q = x.shape[1]
    R = np.empty((tx + 2, ty + 2), dtype=np.float64)
    value = _forward(x, v, gamma, R)

    # padded cost matrix; out-of-range cells keep +inf so their terms
    # vanish, the virtual terminal cell costs zero
    C = np.full((tx + 2, ty + 2), np.inf)
    for i in range(1, tx + 1):
        for j in range(1, ty + 1):
            cost = 0.0
            for k in range(q):
                d = x[i - 1, k] - v[j - 1, k]
                cost += d * d
            C[i, j] = cost
    C[tx + 1, ty + 1] = 0.0

    for i in range(1, tx + 1):
        R[i, ty + 1] = -np.inf
    for j in range(1, ty + 1):
        R[tx + 1, j] = -np.inf
    R[tx + 1, ty + 1] = R[tx, ty]

    E = np.zeros((tx + 2, ty + 2), dtype=np.float64)
    E[tx + 1, ty + 1] = 1.0
    for j in range(ty, 0, -1):
        for i in range(tx, 0, -1):
            a = np.exp((R[i + 1, j] - R[i, j] - C[i + 1, j]) / gamma)
            b = np.exp((R[i, j + 1] - R[i, j] - C[i, j + 1]) / gamma)
            c = np.exp((R[i + 1, j + 1] - R[i, j] - C[i + 1, j + 1]) / gamma)
            E[i, j] = a * E[i + 1, j] + b * E[i, j + 1] + c * E[i + 1, j + 1]

    grad = np.zeros((ty, q), dtype=np.float64)
    for j in range(1, ty + 1):
        for i in range(1, tx + 1):
            e = E[i, j]
            if e != 0.0:
                for k in range(q):
                    grad[j - 1, k] += e * 2.0 * (v[j - 1, k] - x[i - 1, k])
    return value, grad


@njit(cache=True)
def _values_batch(stack, lengths, v, gamma, out):
    n = stack.shape[0]
    R = np.empty((stack.shape[1] + 2, v.shape[0] + 2), dtype=np.float64)
    for ii in range(n):
        out[ii] = _forward(stack[ii, : lengths[ii]], v, gamma, R)


@njit(cache=True)
def _grads_batch(stack, lengths, v, gamma, values, grads):
    n = stack.shape[0]
    for ii in range(n):
        val, g = _sdtw_value_and_grad(stack[ii, : lengths[ii]], v, gamma)
        values[ii] = val
        grads[ii] = g


def _as_series(x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("a series must be a (T, q) array with T >= 1")
    return x


def softdtw_value(x, v, gamma: float) -> float:
    x = _as_series(x)
    v = _as_series(v)
    if x.shape[1] != v.shape[1]:
        raise ValueError(f"channel mismatch: {x.shape[1]} vs {v.shape[1]}")
    return float(_sdtw_value(x, v, float(gamma)))


def softdtw_value_and_grad(x, v, gamma: float) -> tuple[float, np.ndarray]:
    """Alignment value and its gradient in the second series."""
    x = _as_series(x)
    v = _as_series(v)
    if x.shape[1] != v.shape[1]:
        raise ValueError(f"channel mismatch: {x.shape[1]} vs {v.shape[1]}")
    value, grad = _sdtw_value_and_grad(x, v, float(gamma))
    return float(value), grad


def softdtw_values_batch(stack, lengths, v, gamma: float) -> np.ndarray:
    out = np.empty(stack.shape[0], dtype=np.float64)
    _values_batch(stack, lengths, np.ascontiguousarray(v), float(gamma), out)
    return out


def softdtw_grads_batch(stack, lengths, v, gamma: float):
    values = np.empty(stack.shape[0], dtype=np.float64)
    grads = np.empty((stack.shape[0],) + v.shape, dtype=np.float64)
    _grads_batch(stack, lengths, np.ascontiguousarray(v), float(gamma), values, grads)
    return values, grads
