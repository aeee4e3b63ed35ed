"""Similarity-sensitive diversity, magnitude and maximum diversity of finite spaces."""

__version__ = "0.1.0"

from .spaces import Measure, SimilaritySpace, build_finite_space, scale_space, space_from_points
from .means import mean_profile, power_mean
from .diversity import (
    crossing_order,
    diversity,
    diversity_profile,
    entropy,
    is_balanced,
    typicality,
)
from .magnitude import magnitude, normalize_weighting, positive_weighting, weight_vector
from .exact import MaxDivResult, max_diversity_exact, verify_maximiser
from .numeric import SolverOptions, check_all_orders, maximise, quadratic_form
from .asymptotics import (
    minkowski_dimension_estimate,
    scaling_profile,
    uniform_measure_estimate,
    volume_estimate,
)

__all__ = [
    "Measure", "SimilaritySpace", "build_finite_space", "scale_space", "space_from_points",
    "mean_profile", "power_mean",
    "crossing_order", "diversity", "diversity_profile", "entropy", "is_balanced", "typicality",
    "magnitude", "normalize_weighting", "positive_weighting", "weight_vector",
    "MaxDivResult", "max_diversity_exact", "verify_maximiser",
    "SolverOptions", "check_all_orders", "maximise", "quadratic_form",
    "minkowski_dimension_estimate", "scaling_profile", "uniform_measure_estimate",
    "volume_estimate",
]
