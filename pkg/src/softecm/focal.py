"""Focal-set algebra: frames, focal families and credal partitions.

A credal clustering over c clusters assigns each object a mass function on
subsets of the frame {0, .., c-1}.  This module holds the subset bookkeeping
(bitmask focal sets, the ordered family of focal elements a model works
with) and the standard transforms defined on mass matrices: the pignistic
probability, hardening to crisp labels, and the normalized specificity
index used for internal validation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FocalSet",
    "FocalFamily",
    "CredalPartition",
    "enumerate_family",
    "pignistic",
    "hard_assign",
    "normalized_specificity",
    "parse_focal_label",
]

_LABEL_RE = re.compile(r"^\{(\d+(,\d+)*)?\}$")


@dataclass(frozen=True, order=True)
class FocalSet:
    """A subset of the cluster frame, stored as a bitmask over 0..c-1.

    Ordering sorts by (cardinality, bitmask), which is the column order
    used throughout mass matrices and serialized artifacts.
    """

    sort_index: tuple[int, int] = field(init=False, repr=False)
    mask: int
    universe_size: int

    def __post_init__(self):
        if self.universe_size < 1:
            raise ValueError("universe_size must be >= 1")
        if self.mask < 0 or self.mask >= (1 << self.universe_size):
            raise ValueError(
                f"mask {self.mask:#x} has members outside 0..{self.universe_size - 1}"
            )
        object.__setattr__(self, "sort_index", (self.cardinality, self.mask))

    @classmethod
    def from_members(cls, members, universe_size: int) -> "FocalSet":
        mask = 0
        for k in members:
            if not 0 <= k < universe_size:
                raise ValueError(f"member {k} outside 0..{universe_size - 1}")
            mask |= 1 << k
        return cls(mask=mask, universe_size=universe_size)

    @classmethod
    def empty(cls, universe_size: int) -> "FocalSet":
        return cls(mask=0, universe_size=universe_size)

    @classmethod
    def full(cls, universe_size: int) -> "FocalSet":
        return cls(mask=(1 << universe_size) - 1, universe_size=universe_size)

    @property
    def cardinality(self) -> int:
        return bin(self.mask).count("1")

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.universe_size) if self.mask >> k & 1)

    def contains(self, cluster: int) -> bool:
        return bool(self.mask >> cluster & 1)

    def issubset(self, other: "FocalSet") -> bool:
        return self.mask & ~other.mask == 0

    def label(self) -> str:
        """Serialized form: sorted 1-based indices in braces, e.g. "{1,3}"."""
        return "{" + ",".join(str(k + 1) for k in self.members) + "}"

    def __str__(self) -> str:
        return self.label()


def parse_focal_label(label: str, universe_size: int) -> FocalSet:
    """Inverse of :meth:`FocalSet.label` for a known frame size."""
    if not _LABEL_RE.match(label.strip()):
        raise ValueError(f"malformed focal-set label {label!r}")
    inner = label.strip()[1:-1]
    members = [int(tok) - 1 for tok in inner.split(",")] if inner else []
    return FocalSet.from_members(members, universe_size)


@dataclass(frozen=True)
class FocalFamily:
    """Ordered collection of focal elements used by a model.

    The order is fixed: the empty set first, then singletons ascending,
    then larger sets by (cardinality, bitmask).  The empty set and all
    singletons are always present; sets above ``max_cardinality`` are
    excluded except possibly the full frame.
    """

    universe_size: int
    sets: tuple[FocalSet, ...]
    max_cardinality: int
    include_omega: bool

    def __post_init__(self):
        c = self.universe_size
        if not self.sets or self.sets[0].mask != 0:
            raise ValueError("family must start with the empty set")
        masks = [s.mask for s in self.sets]
        if len(set(masks)) != len(masks):
            raise ValueError("family contains duplicate focal sets")
        singletons = {1 << k for k in range(c)}
        if not singletons.issubset(set(masks)):
            raise ValueError("family must contain every singleton")
        if list(self.sets) != sorted(self.sets):
            raise ValueError("family sets out of canonical order")
        full = (1 << c) - 1
        for s in self.sets:
            if s.universe_size != c:
                raise ValueError("focal set frame size mismatch")
            if s.mask != full and s.cardinality > self.max_cardinality and s.mask != 0:
                raise ValueError(f"{s} exceeds the cardinality cap")

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def __getitem__(self, i: int) -> FocalSet:
        return self.sets[i]

    def index_of(self, s: FocalSet) -> int:
        try:
            return self._mask_index[s.mask]
        except AttributeError:
            object.__setattr__(
                self, "_mask_index", {t.mask: i for i, t in enumerate(self.sets)}
            )
            return self._mask_index[s.mask]

    @property
    def nonempty(self) -> tuple[FocalSet, ...]:
        return self.sets[1:]

    def labels(self) -> list[str]:
        return [s.label() for s in self.sets]

    def cardinalities(self) -> np.ndarray:
        """Cardinality per column, empty set included (stored as 0)."""
        return np.array([s.cardinality for s in self.sets], dtype=np.int64)

    def membership_matrix(self) -> np.ndarray:
        """Boolean (len(family)-1, c) matrix of cluster membership for the
        non-empty sets, in family order."""
        out = np.zeros((len(self.sets) - 1, self.universe_size), dtype=bool)
        for a, s in enumerate(self.nonempty):
            for k in s.members:
                out[a, k] = True
        return out


def enumerate_family(c: int, f_max: int, include_omega: bool = False) -> FocalFamily:
    """Build the canonical focal family over ``c`` clusters.

    Contains the empty set, every subset of cardinality <= ``f_max`` and,
    when ``include_omega`` is set (or ``c <= f_max``, where it appears
    anyway), the full frame.
    """
    if c < 1:
        raise ValueError("c must be >= 1")
    if not 1 <= f_max <= c:
        raise ValueError("f_max must satisfy 1 <= f_max <= c")
    full = (1 << c) - 1
    masks = [m for m in range(1 << c) if bin(m).count("1") <= f_max]
    if include_omega and full not in masks:
        masks.append(full)
    sets = sorted(FocalSet(mask=m, universe_size=c) for m in masks)
    return FocalFamily(
        universe_size=c,
        sets=tuple(sets),
        max_cardinality=f_max,
        include_omega=include_omega,
    )


@dataclass(frozen=True)
class CredalPartition:
    """An (n, |family|) matrix of masses, one simplex row per object."""

    family: FocalFamily
    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=np.float64)
        object.__setattr__(self, "masses", m)
        if m.ndim != 2 or m.shape[1] != len(self.family):
            raise ValueError(
                f"mass matrix shape {m.shape} does not match family size {len(self.family)}"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("mass matrix contains non-finite entries")
        if np.any(m < -1e-12) or np.any(m > 1 + 1e-12):
            raise ValueError("mass entries must lie in [0, 1]")
        rows = m.sum(axis=1)
        bad = np.where(np.abs(rows - 1.0) > 1e-9)[0]
        if bad.size:
            raise ValueError(f"mass row {bad[0]} sums to {rows[bad[0]]!r}, not 1")

    @property
    def n_objects(self) -> int:
        return self.masses.shape[0]

    def mass_of(self, s: FocalSet) -> np.ndarray:
        return self.masses[:, self.family.index_of(s)]


def pignistic(partition: CredalPartition, return_degenerate: bool = False):
    """Pignistic probability matrix (n, c).

    Each non-empty mass is split equally among its members and the row is
    renormalized by (1 - m(empty)).  Rows carrying full mass on the empty
    set have no pignistic counterpart and fall back to the uniform
    distribution; pass ``return_degenerate=True`` to also get that row mask.
    """
    fam = partition.family
    c = fam.universe_size
    m = partition.masses
    memb = fam.membership_matrix().astype(np.float64)
    card = fam.cardinalities()[1:].astype(np.float64)
    bet = m[:, 1:] @ (memb / card[:, None])
    m_empty = m[:, 0]
    degenerate = m_empty >= 1.0 - 1e-12
    norm = np.where(degenerate, 1.0, 1.0 - m_empty)
    bet = bet / norm[:, None]
    if np.any(degenerate):
        bet[degenerate] = 1.0 / c
    if return_degenerate:
        return bet, degenerate
    return bet


def hard_assign(partition: CredalPartition) -> np.ndarray:
    """Crisp labels: argmax of the pignistic probabilities, ties to the
    lowest cluster index."""
    return np.argmax(pignistic(partition), axis=1)


def normalized_specificity(partition: CredalPartition) -> float:
    """Average imprecision of the partition, in [0, 1].

    0 means all mass on singletons, 1 means total ignorance (all mass on
    the full frame).  Undefined for a single cluster.
    """
    c = partition.family.universe_size
    if c < 2:
        raise ValueError("normalized specificity needs at least 2 clusters")
    card = partition.family.cardinalities()[1:].astype(np.float64)
    weights = np.log2(card)
    total = float((partition.masses[:, 1:] * weights[None, :]).sum())
    return total / (partition.n_objects * math.log2(c))
