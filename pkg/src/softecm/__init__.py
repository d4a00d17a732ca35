"""Evidential c-means clustering over differentiable semi-metrics.

Produces credal partitions: per-object mass functions over singleton
clusters, meta-clusters (sets of clusters) and an outlier class, with
prototypes optimized by gradient descent under any of the built-in
differentiable dissimilarities (squared Euclidean, one-hot Hamming,
soft dynamic time warping).
"""

from .core import (
    FitResult,
    PrototypeSet,
    SoftEcmConfig,
    fit,
    fit_restarts,
    prototype_gradient,
    soft_objective,
    sweep,
    update_masses,
    update_prototypes,
)
from .data import Dataset, gen_bell_funnel_mix, gen_blobs, gen_cbf, gen_diamond
from .ecm import EcmConfig, ecm_fit, ecm_objective, meta_centroid
from .evaluation import matched_accuracy, rand_index
from .focal import (
    CredalPartition,
    FocalFamily,
    FocalSet,
    enumerate_family,
    hard_assign,
    normalized_specificity,
    pignistic,
)
from .semimetrics import SemiMetricSpec, clamp_distance, distance, distance_grad_v

__version__ = "0.1.0"

__all__ = [
    "CredalPartition",
    "Dataset",
    "EcmConfig",
    "FitResult",
    "FocalFamily",
    "FocalSet",
    "PrototypeSet",
    "SemiMetricSpec",
    "SoftEcmConfig",
    "clamp_distance",
    "distance",
    "distance_grad_v",
    "ecm_fit",
    "ecm_objective",
    "enumerate_family",
    "fit",
    "fit_restarts",
    "gen_bell_funnel_mix",
    "gen_blobs",
    "gen_cbf",
    "gen_diamond",
    "hard_assign",
    "matched_accuracy",
    "meta_centroid",
    "normalized_specificity",
    "pignistic",
    "prototype_gradient",
    "rand_index",
    "soft_objective",
    "sweep",
    "update_masses",
    "update_prototypes",
]
