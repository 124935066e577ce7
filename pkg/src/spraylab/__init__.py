"""Numerical spray and Finsler geometry: curvature, projective deformations,
Funk functions and metrizability residuals, evaluated with forward-mode jets."""

from .coords import (
    TOLERANCES,
    Chart,
    DerivativeTower,
    GridSpec,
    ScalarField,
    TangentSample,
    Tolerances,
    evaluate_tower,
    sample_grid,
)
from .errors import (
    DegenerateMetric,
    DomainError,
    EmptyGridError,
    NonHomogeneousError,
    NonPositiveValue,
    NotBasic,
    PreconditionFailed,
    SmoothnessError,
    SpraylabError,
)
from .expr import field_from_expression, homogeneity_degree, parse, to_source
from .finsler import (
    FinslerFunction,
    geodesic_spray,
    metric_tensor,
    metrizability_residual,
    poincare,
    scalar_flag_decompose,
)
from .projective import ProjectiveFactor, ball_funk, complete_lift, deform, funk_residual
from .spraycalc import (
    SprayField,
    connection,
    isotropy_decompose,
    jacobi_endomorphism,
    jacobi_endomorphism_coordinates,
    ricci_scalar,
)

__version__ = "0.1.0"

__all__ = [
    "Chart",
    "DegenerateMetric",
    "DerivativeTower",
    "DomainError",
    "EmptyGridError",
    "FinslerFunction",
    "GridSpec",
    "NonHomogeneousError",
    "NonPositiveValue",
    "NotBasic",
    "PreconditionFailed",
    "ProjectiveFactor",
    "ScalarField",
    "SmoothnessError",
    "SprayField",
    "SpraylabError",
    "TOLERANCES",
    "TangentSample",
    "Tolerances",
    "ball_funk",
    "complete_lift",
    "connection",
    "deform",
    "evaluate_tower",
    "field_from_expression",
    "funk_residual",
    "geodesic_spray",
    "homogeneity_degree",
    "isotropy_decompose",
    "jacobi_endomorphism",
    "jacobi_endomorphism_coordinates",
    "metric_tensor",
    "metrizability_residual",
    "parse",
    "poincare",
    "ricci_scalar",
    "sample_grid",
    "scalar_flag_decompose",
    "to_source",
]
