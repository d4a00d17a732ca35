"""Classic evidential c-means on numeric data (the Euclidean baseline).

Meta-cluster centroids are not free variables here: each one is the
isobarycenter of its member singleton centroids, and the singleton
centroids have a closed-form update (a c x c linear system from the
stationarity of the inertia).  This is the reference the semi-metric
solver is equivalent to in the squared-Euclidean case, and the baseline
used by the comparison experiments.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import FitResult, PrototypeSet, _masses_from_distances
from .data import Dataset
from .focal import CredalPartition, FocalFamily, FocalSet, enumerate_family

__all__ = ["EcmConfig", "meta_centroid", "ecm_objective", "ecm_fit"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EcmConfig:
    c: int
    alpha: float = 1.0
    beta: float = 2.0
    delta: float = 10.0
    f_max: int = 2
    include_omega: bool = False
    epsilon: float = 1e-3
    max_iter: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.c < 1:
            raise ValueError("c must be >= 1")
        if not self.beta > 1:
            raise ValueError("beta must be > 1")
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not 1 <= self.f_max <= self.c:
            raise ValueError("f_max must satisfy 1 <= f_max <= c")
        if self.epsilon <= 0 or self.max_iter < 1:
            raise ValueError("epsilon must be > 0 and max_iter >= 1")

    def family(self) -> FocalFamily:
        return enumerate_family(self.c, self.f_max, self.include_omega)


def _as_matrix(X) -> np.ndarray:
    objects = X.objects if isinstance(X, Dataset) else X
    M = np.asarray(objects, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("classic evidential c-means needs an (n, p) numeric matrix")
    return M


def meta_centroid(V: np.ndarray, focal: FocalSet) -> np.ndarray:
    """Isobarycenter of the singleton centroids belonging to ``focal``."""
    if focal.cardinality < 1:
        raise ValueError("the empty set has no centroid")
    V = np.asarray(V, dtype=np.float64)
    return V[list(focal.members)].mean(axis=0)


def _derived_centroids(family: FocalFamily, V: np.ndarray) -> np.ndarray:
    """(n_nonempty, p) centroids for every non-empty focal element."""
    memb = family.membership_matrix().astype(np.float64)
    card = family.cardinalities()[1:].astype(np.float64)
    return (memb / card[:, None]) @ V


def ecm_objective(partition: CredalPartition, V: np.ndarray, X, cfg: EcmConfig) -> float:
    """Weighted intra-cluster inertia plus the outlier term."""
    Xm = _as_matrix(X)
    family = partition.family
    Vbar = _derived_centroids(family, np.asarray(V, dtype=np.float64))
    if Vbar.shape[1] != Xm.shape[1]:
        raise ValueError("centroid dimension does not match the data")
    diff = Xm[:, None, :] - Vbar[None, :, :]
    D = (diff * diff).sum(axis=2)
    card = family.cardinalities()[1:].astype(np.float64)
    mb = partition.masses[:, 1:] ** cfg.beta
    data = float((card ** cfg.alpha * mb * D).sum())
    return data + cfg.delta ** 2 * float((partition.masses[:, 0] ** cfg.beta).sum())


def ecm_fit(X, cfg: EcmConfig) -> FitResult:
    """Alternate the closed-form mass and centroid updates to convergence.

    Initial centroids are c distinct data points drawn under the seed.
    Stops when the Frobenius change of the mass matrix drops below
    ``epsilon``.
    """
    Xm = _as_matrix(X)
    n, p = Xm.shape
    if n < cfg.c:
        raise ValueError(f"need at least c={cfg.c} objects, got {n}")
    family = cfg.family()
    memb = family.membership_matrix().astype(np.float64)
    card = family.cardinalities()[1:].astype(np.float64)

    rng = np.random.default_rng(cfg.seed)
    V = Xm[rng.choice(n, size=cfg.c, replace=False)].copy()

    trace: list[float] = []
    masses_prev = None
    masses = None
    converged = False
    iteration = 0
    for iteration in range(1, cfg.max_iter + 1):
        Vbar = _derived_centroids(family, V)
        diff = Xm[:, None, :] - Vbar[None, :, :]
        D = (diff * diff).sum(axis=2)
        masses, _ = _masses_from_distances(D, family, cfg)

        S = masses[:, 1:] ** cfg.beta
        colsum = S.sum(axis=0)
        H = (memb * (card ** (cfg.alpha - 2.0) * colsum)[:, None]).T @ memb
        W = S * (card ** (cfg.alpha - 1.0))[None, :]
        B = (W @ memb).T @ Xm
        try:
            V_new = np.linalg.solve(H, B)
            if not np.all(np.isfinite(V_new)):
                raise np.linalg.LinAlgError("non-finite solution")
            V = V_new
        except np.linalg.LinAlgError:
            # singular system: fall back to one safe gradient step
            logger.warning("singular centroid system; taking a gradient step instead")
            grad = 2.0 * (H @ V - B)
            V = V - grad / (2.0 * float(np.trace(H)) + 1e-12)

        partition = CredalPartition(family=family, masses=masses)
        trace.append(ecm_objective(partition, V, Xm, cfg))
        if masses_prev is not None:
            change = math.sqrt(float(((masses - masses_prev) ** 2).sum()))
            if change < cfg.epsilon:
                converged = True
                break
        masses_prev = masses

    Vbar = _derived_centroids(family, V)
    prototypes = PrototypeSet(
        family=family,
        prototypes={s: Vbar[a].copy() for a, s in enumerate(family.nonempty)},
    )
    return FitResult(
        partition=CredalPartition(family=family, masses=masses),
        prototypes=prototypes,
        objective_trace=trace,
        outer_iterations=iteration,
        converged=converged,
        config=cfg,
    )
