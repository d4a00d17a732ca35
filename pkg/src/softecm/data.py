"""Synthetic dataset generators and tabular/series file formats.

Generators are pure functions of their arguments (seed included).  File
formats: numeric CSV (optional header, optional trailing label column),
categorical CSV (strings, schema inferred or supplied), and JSON-lines for
time series ({"id": ..., "label": ..., "series": [[...], ...]} with the
outer index running over time).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .semimetrics import DataFormatError, encode_categorical, infer_schema

__all__ = [
    "Dataset",
    "gen_diamond",
    "gen_blobs",
    "gen_cbf",
    "gen_bell_funnel_mix",
    "load_numeric_csv",
    "save_numeric_csv",
    "load_categorical_csv",
    "load_timeseries_jsonl",
    "save_timeseries_jsonl",
    "save_labels_csv",
    "load_labels_csv",
    "load_dataset",
    "zscore",
]

NUMERIC = "numeric"
CATEGORICAL = "categorical"
TIMESERIES = "timeseries"


@dataclass
class Dataset:
    """Objects plus optional ground-truth labels and identifiers.

    ``objects`` is an (n, p) array for numeric/categorical data and a list
    of (T, q) arrays for time series.
    """

    objects: np.ndarray | list[np.ndarray]
    kind: str
    labels: np.ndarray | None = None
    names: list[str] | None = None
    schema: list[list[str]] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL, TIMESERIES):
            raise ValueError(f"unknown dataset kind {self.kind!r}")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if len(self.labels) != self.n:
                raise ValueError("labels length does not match object count")
        if self.names is not None and len(self.names) != self.n:
            raise ValueError("names length does not match object count")

    @property
    def n(self) -> int:
        return len(self.objects)


# ---------------------------------------------------------------------------
# generators

# Twelve 2-D points: two mirror-image five-point diamonds, two bridge
# objects in the gap between them (6 leaning left, 7 at the right group's
# inner vertex) and one far outlier.  The exact constants are fixed so the
# bridge objects sit near the midpoint of the cluster prototypes while the
# outlier clears every prototype by more than the atypicality threshold
# used in the companion experiments.
DIAMOND_POINTS = np.array(
    [
        (-3.9, 0.0),   # 1: left outer vertex
        (-2.4, 1.5),   # 2: left top vertex
        (-2.4, -1.5),  # 3: left bottom vertex
        (-0.9, 0.0),   # 4: left inner vertex
        (-2.4, 0.0),   # 5: left center
        (-0.75, 0.6),  # 6: bridge, slightly left of the midline
        (0.9, 0.0),    # 7: bridge at the right group's inner vertex
        (2.4, 1.5),    # 8: right top vertex
        (2.4, -1.5),   # 9: right bottom vertex
        (3.9, 0.0),    # 10: right outer vertex
        (2.4, 0.0),    # 11: right center
        (0.0, 12.5),   # 12: outlier high above both groups
    ]
)

DIAMOND_LABELS = np.array([0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2])

# index sets of the two five-point groups (0-based), used by symmetry checks
DIAMOND_LEFT = (0, 1, 2, 3, 4)
DIAMOND_RIGHT = (6, 7, 8, 9, 10)


def gen_diamond() -> Dataset:
    """The fixed 12-object two-diamond toy layout with one outlier."""
    return Dataset(
        objects=DIAMOND_POINTS.copy(),
        kind=NUMERIC,
        labels=DIAMOND_LABELS.copy(),
        names=[str(i + 1) for i in range(12)],
    )


def gen_blobs(
    per_class: int,
    clusters: int = 2,
    dim: int = 2,
    separation: float = 10.0,
    spread: float = 1.0,
    seed: int = 0,
) -> Dataset:
    """Well-separated isotropic Gaussian blobs on a simplex-ish layout."""
    if per_class < 1 or clusters < 1:
        raise ValueError("per_class and clusters must be >= 1")
    rng = np.random.default_rng(seed)
    centers = np.zeros((clusters, dim))
    for k in range(clusters):
        centers[k, k % dim] = separation * (1 + k // dim)
    X = np.concatenate(
        [centers[k] + spread * rng.standard_normal((per_class, dim)) for k in range(clusters)]
    )
    labels = np.repeat(np.arange(clusters), per_class)
    return Dataset(objects=X, kind=NUMERIC, labels=labels)


def _cbf_window(rng, length: int) -> tuple[int, int]:
    a = int(rng.integers(length // 8, length // 4 + 1))
    w = int(rng.integers(length // 4, 3 * length // 4 + 1))
    return a, min(a + w, length - 1)


def _cbf_series(rng, length: int, shape: str, noise: float, window=None) -> np.ndarray:
    amplitude = 6.0 + noise * float(rng.standard_normal())
    a, b = _cbf_window(rng, length) if window is None else window
    eps = noise * rng.standard_normal(length)
    t = np.arange(length, dtype=np.float64)
    on = (t >= a) & (t <= b)
    if shape == "cylinder":
        profile = np.where(on, amplitude, 0.0)
    elif shape == "bell":
        profile = np.where(on, amplitude * (t - a) / (b - a), 0.0)
    elif shape == "funnel":
        profile = np.where(on, amplitude * (b - t) / (b - a), 0.0)
    else:
        raise ValueError(shape)
    return (profile + eps)[:, None]


def gen_cbf(per_class: int, length: int = 128, seed: int = 0, noise: float = 1.0) -> Dataset:
    """Cylinder/bell/funnel series in class blocks.

    Each series is (6 + eta) on a random support window — flat for the
    cylinder class, a rising ramp for bell, a falling ramp for funnel —
    plus standard normal noise everywhere.  ``noise=0`` keeps the window
    draws but silences eta and the additive noise, exposing the raw shapes.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    if length < 16:
        raise ValueError("length must be >= 16")
    rng = np.random.default_rng(seed)
    objects = []
    for shape in ("cylinder", "bell", "funnel"):
        for _ in range(per_class):
            objects.append(_cbf_series(rng, length, shape, noise))
    labels = np.repeat([0, 1, 2], per_class)
    return Dataset(objects=objects, kind=TIMESERIES, labels=labels)


def gen_bell_funnel_mix(
    per_class: int, length: int = 128, seed: int = 0, noise: float = 1.0
) -> Dataset:
    """Bell, funnel, and an M-shaped bell+funnel mixture class.

    Mixture series sum an independent bell draw supported on the left half
    and a funnel draw supported on the right half, so the noise-free shape
    has two local maxima.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    if length < 16:
        raise ValueError("length must be >= 16")
    rng = np.random.default_rng(seed)
    objects: list[np.ndarray] = []
    for _ in range(per_class):
        objects.append(_cbf_series(rng, length, "bell", noise))
    for _ in range(per_class):
        objects.append(_cbf_series(rng, length, "funnel", noise))
    half = length // 2
    for _ in range(per_class):
        a1 = int(rng.integers(length // 16, length // 8 + 1))
        b1 = a1 + int(rng.integers(length // 4, half - a1 + 1))
        bell = _cbf_series(rng, length, "bell", noise, window=(a1, b1))
        a2 = int(rng.integers(half + length // 16, half + length // 8 + 1))
        b2 = a2 + int(rng.integers(length // 4, length - 1 - a2 + 1))
        funnel = _cbf_series(rng, length, "funnel", noise, window=(a2, b2))
        objects.append(bell + funnel)
    labels = np.repeat([0, 1, 2], per_class)
    return Dataset(objects=objects, kind=TIMESERIES, labels=labels)


# ---------------------------------------------------------------------------
# loaders / writers

def load_numeric_csv(path, has_header: bool = False, label_column: bool = False) -> Dataset:
    """Numeric CSV, one object per row; optional trailing label column."""
    rows = []
    labels = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for r, row in enumerate(reader):
            if r == 0 and has_header:
                continue
            if not row:
                continue
            cells = row[:-1] if label_column else row
            if rows and len(cells) != len(rows[0]):
                raise DataFormatError(
                    f"{path}: row {r} has {len(cells)} values, expected {len(rows[0])}"
                )
            parsed = []
            for j, cell in enumerate(cells):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"{path}: row {r}, column {j}: non-numeric cell {cell!r}"
                    ) from None
            rows.append(parsed)
            if label_column:
                try:
                    labels.append(int(float(row[-1])))
                except ValueError:
                    raise DataFormatError(
                        f"{path}: row {r}: non-integer label {row[-1]!r}"
                    ) from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return Dataset(
        objects=np.asarray(rows, dtype=np.float64),
        kind=NUMERIC,
        labels=np.asarray(labels) if label_column else None,
    )


def save_numeric_csv(path, dataset: Dataset, header: list[str] | None = None):
    X = np.asarray(dataset.objects, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for row in X:
            writer.writerow([repr(float(v)) for v in row])


def load_categorical_csv(path, schema: list[list[str]] | None = None, has_header: bool = False) -> Dataset:
    """Categorical CSV of attribute strings, one-hot encoded on load."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for r, row in enumerate(reader):
            if r == 0 and has_header:
                continue
            if row:
                rows.append([cell.strip() for cell in row])
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    if schema is None:
        schema = infer_schema(rows)
    encoded = encode_categorical(rows, schema)
    return Dataset(objects=encoded, kind=CATEGORICAL, schema=schema)


def load_timeseries_jsonl(path) -> Dataset:
    """JSON-lines series file; lengths may differ, channel counts may not."""
    objects = []
    labels = []
    names = []
    any_label = False
    with open(path) as fh:
        for r, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}: line {r}: invalid JSON ({exc})") from None
            if "series" not in record:
                raise DataFormatError(f"{path}: line {r}: missing 'series'")
            arr = np.asarray(record["series"], dtype=np.float64)
            if arr.ndim == 1:
                arr = arr[:, None]
            if arr.ndim != 2 or arr.shape[0] < 1:
                raise DataFormatError(f"{path}: line {r}: series must be (T, q)")
            if objects and arr.shape[1] != objects[0].shape[1]:
                raise DataFormatError(
                    f"{path}: line {r}: {arr.shape[1]} channels, expected {objects[0].shape[1]}"
                )
            objects.append(arr)
            if "label" in record and record["label"] is not None:
                any_label = True
                labels.append(int(record["label"]))
            else:
                labels.append(-1)
            names.append(str(record.get("id", r)))
    if not objects:
        raise DataFormatError(f"{path}: no series")
    return Dataset(
        objects=objects,
        kind=TIMESERIES,
        labels=np.asarray(labels) if any_label else None,
        names=names,
    )


def save_timeseries_jsonl(path, dataset: Dataset):
    with open(path, "w") as fh:
        for i, series in enumerate(dataset.objects):
            record = {
                "id": dataset.names[i] if dataset.names else str(i),
                "series": np.asarray(series, dtype=np.float64).tolist(),
            }
            if dataset.labels is not None:
                record["label"] = int(dataset.labels[i])
            fh.write(json.dumps(record) + "\n")


def save_labels_csv(path, labels):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for v in np.asarray(labels).tolist():
            writer.writerow([int(v)])


def load_labels_csv(path) -> np.ndarray:
    labels = []
    with open(path, newline="") as fh:
        for r, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                labels.append(int(float(row[0])))
            except ValueError:
                raise DataFormatError(f"{path}: row {r}: bad label {row[0]!r}") from None
    return np.asarray(labels, dtype=np.int64)


def load_dataset(path, fmt: str | None = None, has_header: bool = False,
                 label_column: bool = False, schema=None) -> Dataset:
    """Dispatch on an explicit format or the file extension."""
    p = Path(path)
    if fmt is None:
        fmt = {"csv": NUMERIC, "jsonl": TIMESERIES}.get(p.suffix.lstrip("."), NUMERIC)
    if fmt == NUMERIC:
        return load_numeric_csv(p, has_header=has_header, label_column=label_column)
    if fmt == CATEGORICAL:
        return load_categorical_csv(p, schema=schema, has_header=has_header)
    if fmt == TIMESERIES:
        return load_timeseries_jsonl(p)
    raise ValueError(f"unknown dataset format {fmt!r}")


def zscore(dataset: Dataset) -> Dataset:
    """Column-wise (or channel-wise, for series) standardization."""
    if dataset.kind == TIMESERIES:
        stacked = np.concatenate([np.asarray(o) for o in dataset.objects], axis=0)
        mean = stacked.mean(axis=0)
        std = stacked.std(axis=0)
        std[std == 0] = 1.0
        objects = [(np.asarray(o) - mean) / std for o in dataset.objects]
        return Dataset(objects=objects, kind=dataset.kind, labels=dataset.labels,
                       names=dataset.names)
    X = np.asarray(dataset.objects, dtype=np.float64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    return Dataset(objects=(X - mean) / std, kind=dataset.kind,
                   labels=dataset.labels, names=dataset.names, schema=dataset.schema)
