"""Spectral decompositions, boundedness and Cesaro means for y'(t) = A y(t)."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .ergodic import (
    CesaroReport,
    cesaro_limit,
    cesaro_mean_analytic,
    cesaro_mean_quadrature,
    cesaro_report,
    kernel_limit_check,
    shifted_operator,
    verify_rate_invertible,
    verify_rate_reducible,
    weak_limit_test,
)
from .errors import (
    ContourPlacementError,
    DimensionMismatchError,
    EigensolverError,
    ErgolibError,
    IllConditionedDecompositionError,
    InputError,
    SingularShiftError,
    TrajectoryOverflowWarning,
    UnboundedTrajectoryError,
)
from .evolution import (
    classify_boundedness,
    empirical_boundedness,
    exp_action,
    exp_series_oracle,
)
from .spectral_core import (
    SpectralDecomposition,
    ToleranceConfig,
    eigen_cluster,
    reducible_invertibility,
    riesz_projection_contour,
    spectral_decompose,
    verify_resolution,
)
