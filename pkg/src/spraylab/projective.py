"""Projective deformations ``S -> S - 2 P C`` and Funk functions.

The deformed spray has coefficients ``G^i + P y^i``.  Its connection and
Jacobi endomorphism are available two ways: directly from the new
coefficients, and through the transformation laws

    N  = N0 + P Id + y (x) d_J P
    Phi = Phi0 + (P^2 - S0(P)) Id
          - y (x) (d_J(S0(P) - P^2) + 3 (P d_J P - d_h0 P))

The residual functions below compare the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coords import TOLERANCES, Chart, ScalarField, TangentSample
from .expr import field_from_expression, homogeneity_degree
from .spraycalc import (
    SprayField,
    complete_lift_field,
    connection,
    jacobi_endomorphism,
    spray_derivative,
)

__all__ = [
    "ProjectiveFactor",
    "FunkResidual",
    "deform",
    "deformed_connection",
    "deformed_jacobi",
    "deformed_connection_residual",
    "deformed_jacobi_residual",
    "horizontal_differential",
    "funk_residual",
    "complete_lift",
    "ball_funk",
    "BALL_FUNK",
]

BALL_FUNK = "(dot(x,y) + sqrt(dot(x,y)^2 + dot(y,y)*(1 - dot(x,x))))/(1 - dot(x,x))"


class ProjectiveFactor:
    """A 1-homogeneous function ``P`` used to deform sprays."""

    def __init__(self, field: ScalarField, name: str | None = None,
                 negation_of: "ProjectiveFactor | None" = None):
        self.field = field
        self.name = name or field.name
        self.negation_of = negation_of

    @property
    def chart(self) -> Chart:
        return self.field.chart

    @property
    def dim(self) -> int:
        return self.field.dim

    def __repr__(self):
        return f"ProjectiveFactor({self.name!r})"

    def __neg__(self) -> "ProjectiveFactor":
        if self.negation_of is not None:
            return self.negation_of
        return ProjectiveFactor(-self.field, f"-({self.name})", negation_of=self)

    def scaled(self, c: float) -> "ProjectiveFactor":
        c = float(c)
        return ProjectiveFactor(c * self.field, f"{c!r}*({self.name})")

    def degree(self, p: TangentSample) -> float:
        """Homogeneity degree at ``p`` (needs ``P(p) > 0``)."""
        return homogeneity_degree(self.field, p)

    @classmethod
    def zero(cls, chart: Chart) -> "ProjectiveFactor":
        return cls(ScalarField.constant(chart, 0.0), "0")

    @classmethod
    def from_expression(cls, src: str, chart: Chart) -> "ProjectiveFactor":
        return cls(field_from_expression(src, chart), src)


def ball_funk(chart: Chart) -> ProjectiveFactor:
    """Funk function of the unit ball; solves ``dP/dx = P dP/dy`` for the flat spray."""
    return ProjectiveFactor(field_from_expression(BALL_FUNK, chart), "funk")


def complete_lift(a: ScalarField) -> ProjectiveFactor:
    """``P = a^c = y^i da/dx^i``; evaluation raises ``NotBasic`` if ``a`` sees ``y``."""
    return ProjectiveFactor(complete_lift_field(a), f"({a.name})^c")


def deform(S: SprayField, P: ProjectiveFactor) -> SprayField:
    """The projectively related spray ``S - 2 P C`` (coefficients ``G^i + P y^i``)."""
    if S.origin is not None and S.origin[1].negation_of is P or (
        S.origin is not None and P.negation_of is S.origin[1]
    ):
        return S.origin[0]
    chart = S.chart
    coeffs = [
        g + P.field * ScalarField.coordinate(chart, "y", i) for i, g in enumerate(S.coeffs)
    ]
    return SprayField(coeffs, chart, f"{S.name} - 2({P.name})C", origin=(S, P))


def _connection_terms(S0: SprayField, P: ProjectiveFactor, p: TangentSample):
    n = S0.dim
    t = P.field.jet(p, 1)
    return connection(S0, p), t.value * np.eye(n), np.outer(p.y, t.gradient()[n:])


def deformed_connection(S0: SprayField, P: ProjectiveFactor, p: TangentSample) -> np.ndarray:
    """Right-hand side of the connection law: ``N0 + P Id + y (x) d_J P``."""
    return sum(_connection_terms(S0, P, p))


def horizontal_differential(S0: SprayField, f: ScalarField, p: TangentSample) -> np.ndarray:
    """``(d_h0 f)_j = df/dx^j - N0^i_j df/dy^i``."""
    n = S0.dim
    grad = f.jet(p, 1).gradient()
    return grad[:n] - connection(S0, p).T @ grad[n:]


def _jacobi_terms(S0: SprayField, P: ProjectiveFactor, p: TangentSample, Phi0=None):
    """The transformation law's right-hand side as separate, unsummed pieces."""
    n = S0.dim
    if Phi0 is None:
        Phi0 = jacobi_endomorphism(S0, p)
    Pj = P.field.jet(p, 2)
    Pv = Pj.value
    Py = Pj.gradient()[n:]
    S0P = spray_derivative(S0, P.field, p, 1)
    P2 = (Pj * Pj).truncate(1)
    dh0P = horizontal_differential(S0, P.field, p)
    eye = np.eye(n)
    y = p.y
    return (
        Phi0,
        P2.value * eye,
        -S0P.value * eye,
        -np.outer(y, S0P.gradient()[n:]),
        np.outer(y, P2.gradient()[n:]),
        -3.0 * np.outer(y, Pv * Py),
        3.0 * np.outer(y, dh0P),
    )


def deformed_jacobi(S0: SprayField, P: ProjectiveFactor, p: TangentSample,
                    Phi0: np.ndarray | None = None) -> np.ndarray:
    """Right-hand side of the Jacobi endomorphism transformation law."""
    return sum(_jacobi_terms(S0, P, p, Phi0))


def _discrepancy(direct: np.ndarray, terms) -> float:
    # relative to the largest term, so cancelling terms do not inflate the ratio
    scale = max(float(np.max(np.abs(t))) for t in (direct, *terms))
    return float(np.max(np.abs(direct - sum(terms)))) / (scale + TOLERANCES.abs_floor)


def deformed_connection_residual(S0: SprayField, P: ProjectiveFactor, p: TangentSample
                                 ) -> float:
    """Normalized max-entry gap between the direct and transformed ``N``."""
    direct = connection(deform(S0, P), p)
    return _discrepancy(direct, _connection_terms(S0, P, p))


def deformed_jacobi_residual(S0: SprayField, P: ProjectiveFactor, p: TangentSample) -> float:
    """Normalized max-entry gap between the direct and transformed ``Phi``."""
    direct = jacobi_endomorphism(deform(S0, P), p)
    return _discrepancy(direct, _jacobi_terms(S0, P, p))


@dataclass(frozen=True)
class FunkResidual:
    """Both sides of ``d_h0 P = P d_J P`` and their difference at one point."""

    lhs: np.ndarray  # d_h0 P
    rhs: np.ndarray  # P d_J P
    residual: np.ndarray  # lhs - rhs

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.residual))

    @property
    def scale(self) -> float:
        return float(np.linalg.norm(self.lhs)) + float(np.linalg.norm(self.rhs))

    @property
    def normalized(self) -> float:
        return self.norm / (self.scale + TOLERANCES.abs_floor)

    def is_funk(self, tol: float = 1e-8) -> bool:
        return self.norm <= tol * (self.scale + TOLERANCES.abs_floor)


def funk_residual(S0: SprayField, P: ProjectiveFactor, p: TangentSample) -> FunkResidual:
    n = S0.dim
    t = P.field.jet(p, 1)
    lhs = horizontal_differential(S0, P.field, p)
    rhs = t.value * t.gradient()[n:]
    return FunkResidual(lhs, rhs, lhs - rhs)
