"""Differentiable semi-metrics between data objects and prototypes.

Three dissimilarities share one interface (value plus gradient in the
prototype argument):

* ``sq_euclidean`` -- squared Euclidean distance between equal-shape
  arrays; series of equal length are compared frame by frame.
* ``onehot_hamming`` -- half the squared Euclidean distance on one-hot
  encoded categorical records.  On raw (one-hot) data points it equals the
  number of attributes on which two records disagree, while prototypes may
  carry arbitrary per-level weights.
* ``soft_dtw`` -- smoothed dynamic time warping with parameter ``gamma``,
  defined for series of possibly different lengths.

All three are symmetric.  ``soft_dtw`` can dip slightly below zero, which
is why mass updates clamp distances via :func:`clamp_distance`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sdtw

__all__ = [
    "SQ_EUCLIDEAN",
    "ONEHOT_HAMMING",
    "SOFT_DTW",
    "SemiMetricSpec",
    "DataFormatError",
    "distance",
    "distance_grad_v",
    "clamp_distance",
    "infer_schema",
    "encode_categorical",
    "decode_categorical",
    "StackedObjects",
    "stack_objects",
]

SQ_EUCLIDEAN = "sq_euclidean"
ONEHOT_HAMMING = "onehot_hamming"
SOFT_DTW = "soft_dtw"
_KINDS = (SQ_EUCLIDEAN, ONEHOT_HAMMING, SOFT_DTW)

DISTANCE_FLOOR = 1e-12


class DataFormatError(ValueError):
    """Malformed input data (bad cell, ragged row, unknown level, ...)."""


@dataclass(frozen=True)
class SemiMetricSpec:
    """Which dissimilarity defines distances, and its smoothing parameter."""

    kind: str
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown semi-metric kind {self.kind!r}")
        if self.kind == SOFT_DTW and not self.gamma > 0:
            raise ValueError("soft_dtw needs gamma > 0")

    @classmethod
    def parse(cls, text: str) -> "SemiMetricSpec":
        """Parse "euclidean", "hamming" or "softdtw:<gamma>"."""
        t = text.strip().lower()
        if t == "euclidean":
            return cls(SQ_EUCLIDEAN)
        if t == "hamming":
            return cls(ONEHOT_HAMMING)
        if t == "softdtw":
            return cls(SOFT_DTW)
        if t.startswith("softdtw:"):
            try:
                gamma = float(t.split(":", 1)[1])
            except ValueError as exc:
                raise ValueError(f"bad soft-DTW gamma in {text!r}") from exc
            return cls(SOFT_DTW, gamma=gamma)
        raise ValueError(
            f"cannot parse semi-metric {text!r}; "
            'expected "euclidean", "hamming" or "softdtw:<gamma>"'
        )

    def to_string(self) -> str:
        if self.kind == SQ_EUCLIDEAN:
            return "euclidean"
        if self.kind == ONEHOT_HAMMING:
            return "hamming"
        return f"softdtw:{self.gamma:g}"


def _check_same_shape(x: np.ndarray, v: np.ndarray):
    if x.shape != v.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {v.shape}")


def distance(spec: SemiMetricSpec, x, v) -> float:
    """Dissimilarity between an object and a prototype."""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if spec.kind == SQ_EUCLIDEAN:
        _check_same_shape(x, v)
        return float(((x - v) ** 2).sum())
    if spec.kind == ONEHOT_HAMMING:
        _check_same_shape(x, v)
        return 0.5 * float(((x - v) ** 2).sum())
    return sdtw.softdtw_value(x, v, spec.gamma)


def distance_grad_v(spec: SemiMetricSpec, x, v) -> np.ndarray:
    """Gradient of :func:`distance` with respect to the prototype ``v``."""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if spec.kind == SQ_EUCLIDEAN:
        _check_same_shape(x, v)
        return 2.0 * (v - x)
    if spec.kind == ONEHOT_HAMMING:
        _check_same_shape(x, v)
        return v - x
    _, grad = sdtw.softdtw_value_and_grad(x, v, spec.gamma)
    if v.ndim == 1:
        return grad[:, 0]
    return grad


def clamp_distance(d, floor: float = DISTANCE_FLOOR):
    """Lower-bound distances away from zero for inverse-distance updates."""
    return np.maximum(d, floor)


# ---------------------------------------------------------------------------
# categorical encoding

def infer_schema(rows) -> list[list[str]]:
    """Per-attribute sorted level lists, inferred from a table of strings."""
    if not rows:
        raise DataFormatError("cannot infer a schema from an empty table")
    width = len(rows[0])
    levels: list[set[str]] = [set() for _ in range(width)]
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(
                f"row {r} has {len(row)} cells, expected {width}"
            )
        for j, cell in enumerate(row):
            levels[j].add(str(cell))
    return [sorted(s) for s in levels]


def encode_categorical(rows, schema: list[list[str]]) -> np.ndarray:
    """One-hot encode a table of attribute strings.

    Each attribute occupies one block of columns (one per level, in schema
    order); exactly one column per block is 1.  Unknown levels raise a
    :class:`DataFormatError` naming the offending row and column.
    """
    offsets = np.cumsum([0] + [len(lv) for lv in schema])
    dim = int(offsets[-1])
    out = np.zeros((len(rows), dim), dtype=np.float64)
    index = [{lv: i for i, lv in enumerate(levels)} for levels in schema]
    for r, row in enumerate(rows):
        if len(row) != len(schema):
            raise DataFormatError(
                f"row {r} has {len(row)} cells, expected {len(schema)}"
            )
        for j, cell in enumerate(row):
            try:
                k = index[j][str(cell)]
            except KeyError:
                raise DataFormatError(
                    f"row {r}, column {j}: unknown level {cell!r}"
                ) from None
            out[r, offsets[j] + k] = 1.0
    return out


def decode_categorical(encoded: np.ndarray, schema: list[list[str]]) -> list[list[str]]:
    """Inverse of :func:`encode_categorical` (argmax per block)."""
    offsets = np.cumsum([0] + [len(lv) for lv in schema])
    rows = []
    for vec in np.atleast_2d(encoded):
        row = []
        for j, levels in enumerate(schema):
            block = vec[offsets[j] : offsets[j + 1]]
            row.append(levels[int(np.argmax(block))])
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# batched plumbing used by the fitting loops

@dataclass(frozen=True)
class StackedObjects:
    """Dataset objects in array form for vectorized distance work.

    ``layout`` is "vector" (X is (n, p)) or "series" (X is a padded
    (n, T_max, q) stack with per-object ``lengths``).
    """

    layout: str
    X: np.ndarray
    lengths: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.X.shape[0]


def stack_objects(spec: SemiMetricSpec, objects) -> StackedObjects:
    """Validate objects against the metric and stack them into arrays."""
    arrays = [np.asarray(o, dtype=np.float64) for o in objects]
    if not arrays:
        raise ValueError("empty dataset")
    ndims = {a.ndim for a in arrays}
    if len(ndims) != 1 or ndims.pop() not in (1, 2):
        raise ValueError("objects must all be 1-D vectors or all (T, q) series")
    first = arrays[0]

    if first.ndim == 1:
        p = first.shape[0]
        if any(a.shape != (p,) for a in arrays):
            raise ValueError("vector objects must share one dimension")
        if spec.kind == SOFT_DTW:
            # scalar sequences: treat each vector as a length-p univariate series
            stackv = np.ascontiguousarray(
                np.stack(arrays)[:, :, None], dtype=np.float64
            )
            lengths = np.full(len(arrays), p, dtype=np.int64)
            return StackedObjects("series", stackv, lengths)
        return StackedObjects("vector", np.ascontiguousarray(np.stack(arrays)))

    q = first.shape[1]
    if any(a.shape[1] != q for a in arrays):
        raise ValueError("series objects must share their channel count")
    lengths = np.array([a.shape[0] for a in arrays], dtype=np.int64)
    if spec.kind == SOFT_DTW:
        tmax = int(lengths.max())
        stackv = np.zeros((len(arrays), tmax, q), dtype=np.float64)
        for i, a in enumerate(arrays):
            stackv[i, : a.shape[0]] = a
        return StackedObjects("series", np.ascontiguousarray(stackv), lengths)
    if len(set(lengths.tolist())) != 1:
        raise ValueError(f"{spec.kind} needs equal-length series")
    flat = np.ascontiguousarray(np.stack(arrays).reshape(len(arrays), -1))
    return StackedObjects("vector", flat)


def prototype_shape(spec: SemiMetricSpec, stacked: StackedObjects, length: int | None = None):
    """Shape prototypes must have for this dataset under this metric."""
    if stacked.layout == "vector":
        return (stacked.X.shape[1],)
    t = stacked.X.shape[1] if length is None else int(length)
    return (t, stacked.X.shape[2])


def distances_to_prototype(spec: SemiMetricSpec, stacked: StackedObjects, v: np.ndarray) -> np.ndarray:
    """(n,) distances from every object to one prototype."""
    if stacked.layout == "vector":
        diff = stacked.X - v[None, :]
        d = (diff * diff).sum(axis=1)
        return 0.5 * d if spec.kind == ONEHOT_HAMMING else d
    return sdtw.softdtw_values_batch(stacked.X, stacked.lengths, v, spec.gamma)


def grads_to_prototype(spec: SemiMetricSpec, stacked: StackedObjects, v: np.ndarray):
    """(values, grads): per-object distances and gradients w.r.t. ``v``.

    ``grads`` has shape (n,) + v.shape.
    """
    if stacked.layout == "vector":
        diff = v[None, :] - stacked.X
        if spec.kind == ONEHOT_HAMMING:
            d = 0.5 * (diff * diff).sum(axis=1)
            return d, diff
        return (diff * diff).sum(axis=1), 2.0 * diff
    return sdtw.softdtw_grads_batch(stacked.X, stacked.lengths, v, spec.gamma)


def pair_distance(spec: SemiMetricSpec, u: np.ndarray, v: np.ndarray) -> float:
    """Distance between two prototypes (same space as the objects)."""
    return distance(spec, u, v)


def pair_grads(spec: SemiMetricSpec, u: np.ndarray, v: np.ndarray):
    """(value, grad_u, grad_v) for a prototype pair, exploiting symmetry."""
    if spec.kind == SQ_EUCLIDEAN:
        diff = u - v
        return float((diff * diff).sum()), 2.0 * diff, -2.0 * diff
    if spec.kind == ONEHOT_HAMMING:
        diff = u - v
        return 0.5 * float((diff * diff).sum()), diff, -diff
    value, grad_v = sdtw.softdtw_value_and_grad(u, v, spec.gamma)
    _, grad_u = sdtw.softdtw_value_and_grad(v, u, spec.gamma)
    return value, grad_u, grad_v
