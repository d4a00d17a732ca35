"""Credal clustering with differentiable semi-metrics.

The fit alternates two steps until the mass matrix stops moving:

1. a closed-form mass update per object over all non-empty focal elements
   (inverse-distance weights with a cardinality penalty, plus an outlier
   share priced by ``delta**2``), and
2. joint gradient descent on *all* prototypes — singleton clusters and
   meta-clusters alike — of the relaxed objective

   ``J = sum_i sum_A |A|^alpha m_iA^beta d(x_i, v_A)
        + sum_i delta^2 m_i(empty)^beta
        + lam * sum_{|A|>1} sum_{k in A} d(v_k, v_A)``.

The third term softly ties each meta-cluster prototype to the prototypes
of its member clusters (and pulls those members back), replacing the
closed-form isobarycenter that only exists in Euclidean spaces.  With the
squared Euclidean metric and a large ``lam`` the solution approaches the
classic evidential c-means one (see :mod:`softecm.ecm`).

Fixed-step descent is safeguarded by step halving, so the recorded
objective trace is non-increasing for any learning rate.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from .data import Dataset
from .focal import (
    CredalPartition,
    FocalFamily,
    FocalSet,
    enumerate_family,
    hard_assign,
    normalized_specificity,
    parse_focal_label,
)
from .semimetrics import (
    DISTANCE_FLOOR,
    SQ_EUCLIDEAN,
    ONEHOT_HAMMING,
    SemiMetricSpec,
    StackedObjects,
    distances_to_prototype,
    grads_to_prototype,
    pair_grads,
    pair_distance,
    stack_objects,
)

__all__ = [
    "SoftEcmConfig",
    "PrototypeSet",
    "FitResult",
    "NumericalError",
    "soft_objective",
    "update_masses",
    "prototype_gradient",
    "update_prototypes",
    "fit",
    "fit_restarts",
    "sweep",
    "SweepCell",
    "SweepResult",
    "DEFAULT_BETA_GRID",
    "DEFAULT_LAMBDA_GRID",
    "write_masses_csv",
    "load_masses_csv",
    "write_prototypes_json",
    "write_summary_json",
]

logger = logging.getLogger(__name__)

DEFAULT_BETA_GRID = tuple(round(1.1 + 0.1 * k, 1) for k in range(10))
DEFAULT_LAMBDA_GRID = tuple(float(k) for k in range(1, 11))

MAX_HALVINGS = 20


class NumericalError(RuntimeError):
    """Raised when the optimizer meets non-finite numbers."""


@dataclass(frozen=True)
class SoftEcmConfig:
    """All hyperparameters of a fit.

    ``lam`` weighs the prototype-consistency penalty; ``epsilon`` stops the
    outer loop (Frobenius change of the mass matrix), ``xi`` the inner
    descent (prototype change), ``rho`` is the descent step.
    ``prototype_length`` fixes the length of series prototypes (defaults
    to the longest series in the dataset).
    """

    c: int
    alpha: float = 1.0
    beta: float = 2.0
    delta: float = 10.0
    lam: float = 1.0
    f_max: int = 2
    include_omega: bool = False
    metric: SemiMetricSpec = SemiMetricSpec(SQ_EUCLIDEAN)
    epsilon: float = 1e-3
    xi: float = 1e-4
    rho: float = 0.05
    max_outer: int = 100
    max_inner: int = 200
    seed: int = 0
    prototype_length: int | None = None

    def __post_init__(self):
        if isinstance(self.metric, str):
            object.__setattr__(self, "metric", SemiMetricSpec.parse(self.metric))
        if self.c < 1:
            raise ValueError("c must be >= 1")
        if not self.beta > 1:
            raise ValueError("beta must be > 1")
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if self.alpha < 0 or self.lam < 0:
            raise ValueError("alpha and lam must be >= 0")
        if not (self.epsilon > 0 and self.xi > 0 and self.rho > 0):
            raise ValueError("epsilon, xi and rho must be > 0")
        if not 1 <= self.f_max <= self.c:
            raise ValueError("f_max must satisfy 1 <= f_max <= c")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")

    def family(self) -> FocalFamily:
        return enumerate_family(self.c, self.f_max, self.include_omega)


@dataclass
class PrototypeSet:
    """One prototype per non-empty focal element of the family."""

    family: FocalFamily
    prototypes: dict[FocalSet, np.ndarray]

    def __post_init__(self):
        missing = [s.label() for s in self.family.nonempty if s not in self.prototypes]
        if missing:
            raise ValueError(f"prototypes missing for {missing}")
        shapes = {self.prototypes[s].shape for s in self.family.nonempty}
        if len(shapes) != 1:
            raise ValueError(f"prototype shapes differ: {shapes}")

    def __getitem__(self, s: FocalSet) -> np.ndarray:
        return self.prototypes[s]

    def as_array(self) -> np.ndarray:
        """(n_sets,) + prototype shape, in family order (empty set skipped)."""
        return np.stack([self.prototypes[s] for s in self.family.nonempty])

    @classmethod
    def from_array(cls, family: FocalFamily, stacked) -> "PrototypeSet":
        protos = {s: np.array(stacked[a]) for a, s in enumerate(family.nonempty)}
        return cls(family=family, prototypes=protos)


@dataclass
class FitResult:
    """Outcome of one fit: final partition, prototypes and diagnostics."""

    partition: CredalPartition
    prototypes: PrototypeSet
    objective_trace: list[float]
    outer_iterations: int
    converged: bool
    config: SoftEcmConfig


# ---------------------------------------------------------------------------
# internals operating on stacked arrays

def _objects_of(X):
    return X.objects if isinstance(X, Dataset) else X


def _derive_seed(*parts) -> int:
    return int(np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1)[0])


def _resample_series(arr: np.ndarray, length: int) -> np.ndarray:
    if arr.shape[0] == length:
        return arr.copy()
    src = np.linspace(0.0, 1.0, arr.shape[0])
    dst = np.linspace(0.0, 1.0, length)
    return np.stack([np.interp(dst, src, arr[:, k]) for k in range(arr.shape[1])], axis=1)


def _distance_matrix(spec: SemiMetricSpec, stacked: StackedObjects, V: np.ndarray) -> np.ndarray:
    """(n, n_prototypes) raw distances."""
    if stacked.layout == "vector":
        diff = stacked.X[:, None, :] - V[None, :, :]
        D = (diff * diff).sum(axis=2)
        return 0.5 * D if spec.kind == ONEHOT_HAMMING else D
    cols = [distances_to_prototype(spec, stacked, V[a]) for a in range(V.shape[0])]
    return np.stack(cols, axis=1)


def _penalty_pairs(family: FocalFamily) -> list[tuple[int, int]]:
    """(singleton index, meta index) pairs in the non-empty ordering.

    Singletons occupy the first ``c`` non-empty slots in cluster order, so
    the member k of a meta-cluster lives at non-empty index k.
    """
    pairs = []
    for a, s in enumerate(family.nonempty):
        if s.cardinality > 1:
            pairs.extend((k, a) for k in s.members)
    return pairs


def _penalty_value(spec, V, pairs, lam: float) -> float:
    if lam == 0.0 or not pairs:
        return 0.0
    return lam * sum(pair_distance(spec, V[k], V[a]) for k, a in pairs)


def _objective_arrays(spec, stacked, masses, V, family, cfg, D=None) -> float:
    if D is None:
        D = _distance_matrix(spec, stacked, V)
    card = family.cardinalities()[1:].astype(np.float64)
    mb = masses[:, 1:] ** cfg.beta
    data = float((card ** cfg.alpha * mb * D).sum())
    empty = cfg.delta ** 2 * float((masses[:, 0] ** cfg.beta).sum())
    return data + empty + _penalty_value(spec, V, _penalty_pairs(family), cfg.lam)


def _masses_from_distances(D: np.ndarray, family: FocalFamily, cfg) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form row-wise minimizer of the objective for fixed prototypes.

    Computed in log space so that near-zero distances and beta close to 1
    reduce to the crisp limit instead of overflowing.  Returns the full
    mass matrix (empty-set column first) and a mask of rows in which some
    distance hit the clamp floor.
    """
    card = family.cardinalities()[1:].astype(np.float64)
    clamped = np.maximum(D, DISTANCE_FLOOR)
    clamped_rows = (D < DISTANCE_FLOOR).any(axis=1)
    expo = 1.0 / (cfg.beta - 1.0)
    with np.errstate(divide="ignore"):
        logits = -expo * (cfg.alpha * np.log(card)[None, :] + np.log(clamped))
    empty_logit = -expo * 2.0 * math.log(cfg.delta)
    full = np.concatenate(
        [np.full((D.shape[0], 1), empty_logit), logits], axis=1
    )
    full -= full.max(axis=1, keepdims=True)
    w = np.exp(full)
    masses = w / w.sum(axis=1, keepdims=True)
    return masses, clamped_rows


def _data_gradients(spec, stacked, masses, V, family, cfg) -> np.ndarray:
    """Gradient of the data term in every prototype; (nA,) + proto shape."""
    card = family.cardinalities()[1:].astype(np.float64)
    card_alpha = card ** cfg.alpha
    mb = masses[:, 1:] ** cfg.beta
    if stacked.layout == "vector":
        wsum = mb.sum(axis=0)
        xtw = stacked.X.T @ mb
        base = wsum[:, None] * V - xtw.T
        factor = 1.0 if spec.kind == ONEHOT_HAMMING else 2.0
        return factor * card_alpha[:, None] * base
    grads = np.zeros_like(V)
    for a in range(V.shape[0]):
        _, g = grads_to_prototype(spec, stacked, V[a])
        grads[a] = card_alpha[a] * np.tensordot(mb[:, a], g, axes=1)
    return grads


def _full_gradients(spec, stacked, masses, V, family, cfg) -> np.ndarray:
    """Joint gradient of the objective in all prototypes.

    Meta-cluster prototypes feel their data term plus the pull toward each
    member prototype; member (singleton) prototypes feel the symmetric
    penalty pull from every meta-cluster containing them.
    """
    grads = _data_gradients(spec, stacked, masses, V, family, cfg)
    if cfg.lam > 0.0:
        for k, a in _penalty_pairs(family):
            _, gu, gv = pair_grads(spec, V[k], V[a])
            grads[a] += cfg.lam * gv
            grads[k] += cfg.lam * gu
    return grads


def _descend_prototypes(spec, stacked, masses, V, family, cfg):
    """Inner loop: safeguarded fixed-step descent on all prototypes.

    Returns (V, objective) with objective never above the starting one.
    """
    V = V.copy()
    j_current = _objective_arrays(spec, stacked, masses, V, family, cfg)
    for _ in range(cfg.max_inner):
        grads = _full_gradients(spec, stacked, masses, V, family, cfg)
        if not np.all(np.isfinite(grads)):
            bad = next(
                s.label()
                for a, s in enumerate(family.nonempty)
                if not np.all(np.isfinite(grads[a]))
            )
            raise NumericalError(f"non-finite gradient for prototype {bad}")
        step = cfg.rho
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            trial = V - step * grads
            j_trial = _objective_arrays(spec, stacked, masses, trial, family, cfg)
            if np.isfinite(j_trial) and j_trial <= j_current:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            logger.warning(
                "prototype step rejected after %d halvings; keeping previous prototypes",
                MAX_HALVINGS,
            )
            break
        moved = math.sqrt(float(((trial - V) ** 2).sum()))
        V = trial
        j_current = j_trial
        if moved < cfg.xi:
            break
    return V, j_current


def _initial_prototypes(spec, stacked, objects, family, cfg) -> np.ndarray:
    """Seeded draw of c distinct objects for the singletons; each
    meta-cluster starts at the componentwise mean of its members."""
    n = stacked.n
    if n < cfg.c:
        raise ValueError(f"need at least c={cfg.c} objects, got {n}")
    rng = np.random.default_rng(cfg.seed)
    chosen = rng.choice(n, size=cfg.c, replace=False)
    if stacked.layout == "vector":
        singles = stacked.X[chosen].copy()
    else:
        length = cfg.prototype_length or int(stacked.lengths.max())
        singles = np.stack(
            [
                _resample_series(np.asarray(objects[i], dtype=np.float64), length)
                for i in chosen
            ]
        )
    V = np.zeros((len(family.nonempty),) + singles.shape[1:])
    for a, s in enumerate(family.nonempty):
        members = list(s.members)
        V[a] = singles[members[0]] if s.cardinality == 1 else singles[members].mean(axis=0)
    return V


def _stack_for(cfg: SoftEcmConfig, X) -> StackedObjects:
    return stack_objects(cfg.metric, _objects_of(X))


# ---------------------------------------------------------------------------
# public operations

def soft_objective(partition: CredalPartition, prototypes: PrototypeSet, X, cfg: SoftEcmConfig) -> float:
    """Relaxed objective at a given partition/prototype pair.

    Uses raw (unclamped) distances; the clamp only protects the mass
    update.
    """
    stacked = _stack_for(cfg, X)
    if partition.n_objects != stacked.n:
        raise ValueError("partition size does not match the dataset")
    return _objective_arrays(
        cfg.metric, stacked, partition.masses, prototypes.as_array(), partition.family, cfg
    )


def update_masses(X, prototypes: PrototypeSet, cfg: SoftEcmConfig, return_clamped: bool = False):
    """Optimal credal partition for fixed prototypes."""
    stacked = _stack_for(cfg, X)
    family = prototypes.family
    D = _distance_matrix(cfg.metric, stacked, prototypes.as_array())
    masses, clamped_rows = _masses_from_distances(D, family, cfg)
    partition = CredalPartition(family=family, masses=masses)
    if return_clamped:
        return partition, clamped_rows
    return partition


def prototype_gradient(partition: CredalPartition, prototypes: PrototypeSet, X, cfg: SoftEcmConfig) -> dict[FocalSet, np.ndarray]:
    """Gradient of :func:`soft_objective` in every prototype, keyed by focal set."""
    stacked = _stack_for(cfg, X)
    grads = _full_gradients(
        cfg.metric, stacked, partition.masses, prototypes.as_array(), partition.family, cfg
    )
    return {s: grads[a] for a, s in enumerate(partition.family.nonempty)}


def update_prototypes(partition: CredalPartition, prototypes: PrototypeSet, X, cfg: SoftEcmConfig) -> PrototypeSet:
    """Safeguarded gradient descent on all prototypes with masses fixed."""
    stacked = _stack_for(cfg, X)
    V, _ = _descend_prototypes(
        cfg.metric, stacked, partition.masses, prototypes.as_array(), partition.family, cfg
    )
    return PrototypeSet.from_array(partition.family, V)


def fit(X, cfg: SoftEcmConfig) -> FitResult:
    """Run the alternating optimization until the partition stabilizes.

    Deterministic for a given config: the only randomness is the seeded
    choice of initial prototypes.
    """
    objects = _objects_of(X)
    stacked = _stack_for(cfg, X)
    family = cfg.family()
    V = _initial_prototypes(cfg.metric, stacked, objects, family, cfg)
    spec = cfg.metric

    trace: list[float] = []
    masses_prev = None
    masses = None
    converged = False
    outer = 0
    clamp_events = 0
    for outer in range(1, cfg.max_outer + 1):
        D = _distance_matrix(spec, stacked, V)
        masses, clamped_rows = _masses_from_distances(D, family, cfg)
        clamp_events += int(clamped_rows.sum())
        V, j_value = _descend_prototypes(spec, stacked, masses, V, family, cfg)
        trace.append(j_value)
        if masses_prev is not None:
            change = math.sqrt(float(((masses - masses_prev) ** 2).sum()))
            if change < cfg.epsilon:
                converged = True
                break
        masses_prev = masses
    if clamp_events:
        logger.info("distance clamp floor hit in %d row updates", clamp_events)

    partition = CredalPartition(family=family, masses=masses)
    return FitResult(
        partition=partition,
        prototypes=PrototypeSet.from_array(family, V),
        objective_trace=trace,
        outer_iterations=outer,
        converged=converged,
        config=cfg,
    )


def fit_restarts(X, cfg: SoftEcmConfig, restarts: int = 10) -> FitResult:
    """Best of several seeded restarts, judged by the final objective."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best = None
    for r in range(restarts):
        run_cfg = replace(cfg, seed=_derive_seed(cfg.seed, r))
        result = fit(X, run_cfg)
        if best is None or result.objective_trace[-1] < best.objective_trace[-1]:
            best = result
    return best


# ---------------------------------------------------------------------------
# hyperparameter sweep

@dataclass
class SweepCell:
    beta: float
    lam: float
    mean_nstar: float | None
    std_nstar: float | None
    runs_ok: int
    error: str | None = None


@dataclass
class SweepResult:
    cells: list[SweepCell]
    best: SweepCell


def sweep(
    X,
    cfg: SoftEcmConfig,
    beta_grid=DEFAULT_BETA_GRID,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    runs_per_cell: int = 1,
) -> SweepResult:
    """Grid search over (beta, lam) minimizing the mean specificity index.

    Every run is seeded from the base seed, the cell index and the run
    index, so a sweep is reproducible cell by cell.  Ties prefer the
    smaller lam, then the smaller beta.
    """
    beta_grid = list(beta_grid)
    lambda_grid = list(lambda_grid)
    if not beta_grid or not lambda_grid:
        raise ValueError("grids must be non-empty")
    if runs_per_cell < 1:
        raise ValueError("runs_per_cell must be >= 1")
    cells = []
    for ci, (beta, lam) in enumerate(product(beta_grid, lambda_grid)):
        values = []
        last_error = None
        for r in range(runs_per_cell):
            run_cfg = replace(
                cfg, beta=beta, lam=lam, seed=_derive_seed(cfg.seed, ci, r)
            )
            try:
                result = fit(X, run_cfg)
                values.append(normalized_specificity(result.partition))
            except Exception as exc:  # noqa: BLE001 - cell failures are data
                last_error = f"{type(exc).__name__}: {exc}"
                logger.warning("sweep cell beta=%s lam=%s run %d failed: %s", beta, lam, r, exc)
        if values:
            cells.append(
                SweepCell(
                    beta=beta,
                    lam=lam,
                    mean_nstar=float(np.mean(values)),
                    std_nstar=float(np.std(values)),
                    runs_ok=len(values),
                    error=last_error,
                )
            )
        else:
            cells.append(
                SweepCell(beta=beta, lam=lam, mean_nstar=None, std_nstar=None,
                          runs_ok=0, error=last_error)
            )
    usable = [c for c in cells if c.mean_nstar is not None]
    if not usable:
        raise NumericalError("every sweep cell failed")
    best = min(usable, key=lambda c: (c.mean_nstar, c.lam, c.beta))
    return SweepResult(cells=cells, best=best)


# ---------------------------------------------------------------------------
# serialization

def write_masses_csv(path, partition: CredalPartition, names: list[str] | None = None):
    """One row per object, one column per focal element (labeled header)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = partition.family.labels()
        if names is not None:
            writer.writerow(["id"] + header)
        else:
            writer.writerow(header)
        for i, row in enumerate(partition.masses):
            cells = [repr(float(v)) for v in row]
            writer.writerow(([names[i]] + cells) if names is not None else cells)


def load_masses_csv(path) -> CredalPartition:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        offset = 1 if header and header[0] == "id" else 0
        labels = header[offset:]
        rows = [[float(v) for v in row[offset:]] for row in reader if row]
    universe = 0
    for lab in labels:
        inner = lab.strip()[1:-1]
        if inner:
            universe = max(universe, max(int(tok) for tok in inner.split(",")))
    sets = tuple(parse_focal_label(lab, universe) for lab in labels)
    non_full_cards = [s.cardinality for s in sets if s.cardinality not in (0, universe)]
    f_max = max(non_full_cards) if non_full_cards else universe
    include_omega = any(s.cardinality == universe for s in sets) and f_max < universe
    family = FocalFamily(
        universe_size=universe,
        sets=sets,
        max_cardinality=f_max,
        include_omega=include_omega,
    )
    return CredalPartition(family=family, masses=np.asarray(rows, dtype=np.float64))


def write_prototypes_json(path, prototypes: PrototypeSet):
    payload = {
        s.label(): prototypes[s].tolist() for s in prototypes.family.nonempty
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def config_dict(cfg) -> dict:
    out = {}
    for key, value in vars(cfg).items():
        if isinstance(value, SemiMetricSpec):
            out[key] = value.to_string()
        else:
            out[key] = value
    return out


def write_summary_json(path, result: FitResult, extra: dict | None = None):
    """Config echo, trace, convergence, index values and hard labels."""
    partition = result.partition
    argmax_cols = np.argmax(partition.masses, axis=1)
    labels = partition.family.labels()
    summary = {
        "config": config_dict(result.config),
        "objective_trace": [float(v) for v in result.objective_trace],
        "outer_iterations": result.outer_iterations,
        "converged": result.converged,
        "n_objects": partition.n_objects,
        "normalized_specificity": (
            normalized_specificity(partition)
            if partition.family.universe_size >= 2
            else None
        ),
        "hard_labels": hard_assign(partition).tolist(),
        "argmax_focal": [labels[a] for a in argmax_cols],
    }
    if extra:
        summary.update(extra)
    with open(path, "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
        fh.write("\n")
