"""Spray calculus: nonlinear connection, horizontal projector, curvature.

A spray ``S = y^i d/dx^i - 2 G^i(x, y) d/dy^i`` is stored through its
coefficients ``G^i``.  Vector-valued 1-forms that are semi-basic and
vertical-valued (``J``, the Jacobi endomorphism, ``P J`` ...) are ``n x n``
matrices ``M[i, j]`` standing for ``M^i_j d/dy^i (x) dx^j``; in that
representation ``J`` is the identity.

Two independent routes compute the Jacobi endomorphism:

* :func:`jacobi_endomorphism` works on the full ``2n``-dimensional tangent
  bundle, building ``h = (Id - [S, J]) / 2`` and ``(Id - h) o [S, h]`` from
  Lie derivatives of (1,1)-tensor fields.
* :func:`jacobi_endomorphism_coordinates` evaluates the closed form
  ``2 dG^i/dx^j - S(N^i_j) - N^i_m N^m_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import jet as _jet
from .coords import TOLERANCES, Chart, ScalarField, TangentSample
from .expr import field_from_expression
from .jet import Jet

__all__ = [
    "SprayField",
    "IsotropyResult",
    "connection",
    "horizontal_projector",
    "horizontal_projector_coordinates",
    "jacobi_endomorphism",
    "jacobi_endomorphism_coordinates",
    "jacobi_endomorphism_full",
    "ricci_scalar",
    "isotropy_decompose",
    "spray_derivative",
    "complete_lift_field",
]


class SprayField:
    """Spray coefficients ``G^i`` on a chart.

    ``origin`` records ``(base, factor)`` when the spray came from a
    projective deformation, so undoing a deformation returns ``base`` itself.
    """

    def __init__(self, coeffs: Sequence[ScalarField], chart: Chart, name: str = "spray",
                 origin: tuple | None = None):
        if len(coeffs) != chart.dim:
            raise ValueError(f"spray on a {chart.dim}-dim chart needs {chart.dim} coefficients")
        self.coeffs = tuple(coeffs)
        self.chart = chart
        self.name = name
        self.origin = origin

    @property
    def dim(self) -> int:
        return self.chart.dim

    def __repr__(self):
        return f"SprayField({self.name!r}, dim={self.dim})"

    def jets(self, p: TangentSample, order: int) -> list[Jet]:
        return [g.jet(p, order) for g in self.coeffs]

    def values(self, p: TangentSample) -> np.ndarray:
        return np.array([g.value(p) for g in self.coeffs])

    @classmethod
    def flat(cls, chart: Chart) -> "SprayField":
        zero = ScalarField.constant(chart, 0.0)
        return cls([zero] * chart.dim, chart, "flat")

    @classmethod
    def from_expressions(cls, exprs: Sequence[str], chart: Chart, name: str | None = None
                         ) -> "SprayField":
        coeffs = [field_from_expression(e, chart) for e in exprs]
        return cls(coeffs, chart, name or "G=(" + "; ".join(exprs) + ")")


def connection(S: SprayField, p: TangentSample) -> np.ndarray:
    """``N^i_j = dG^i/dy^j`` at ``p``."""
    n = S.dim
    return np.array([j.gradient()[n:] for j in S.jets(p, 1)])


def horizontal_projector_coordinates(N: np.ndarray) -> np.ndarray:
    """``2n x 2n`` matrix of ``h`` in the frame ``(d/dx, d/dy)`` built from ``N``."""
    n = N.shape[0]
    h = np.zeros((2 * n, 2 * n))
    h[:n, :n] = np.eye(n)
    h[n:, :n] = -N
    return h


def _tangent_structure(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[n:, :n] = np.eye(n)
    return J


def _spray_vector_jets(S: SprayField, p: TangentSample, order: int) -> list[Jet]:
    """Components ``(y^i, -2 G^i)`` of ``S`` as jets on the 2n-dim bundle."""
    n = S.dim
    z = _jet.variables(p.z, order)
    return z[n:] + [-2.0 * g for g in S.jets(p, order)]


def _jacobian(vec: Sequence[Jet]) -> list[list[Jet]]:
    """``D[B][C] = d vec^B / dz^C`` as jets one order lower."""
    m = len(vec)
    return [[vec[b].diff(c) for c in range(m)] for b in range(m)]


def _matmul(A, B):
    m = len(A)
    k = len(B[0])
    inner = len(B)
    out = []
    for i in range(m):
        row = []
        for j in range(k):
            s = 0.0
            for l in range(inner):
                a, b = A[i][l], B[l][j]
                if isinstance(a, float) and a == 0.0 or isinstance(b, float) and b == 0.0:
                    continue
                s = s + a * b
            row.append(s)
        out.append(row)
    return out


def _value(v) -> float:
    return v.value if isinstance(v, Jet) else float(v)


def _bracket_projector(S: SprayField, p: TangentSample, order: int):
    """``h = (Id - [S, J]) / 2`` as a matrix of jets of the given order.

    For a constant (1,1)-tensor ``J`` the Froelicher-Nijenhuis bracket with a
    vector field is the Lie derivative, whose matrix is ``J DS - DS J``.
    """
    m = 2 * S.dim
    Svec = _spray_vector_jets(S, p, order + 1)
    DS = _jacobian(Svec)
    J = _tangent_structure(S.dim).tolist()
    DSJ = _matmul(DS, J)
    JDS = _matmul(J, DS)
    h = [[0.5 * ((1.0 if a == b else 0.0) + DSJ[a][b] - JDS[a][b]) for b in range(m)]
         for a in range(m)]
    return h, Svec, DS


def horizontal_projector(S: SprayField, p: TangentSample) -> np.ndarray:
    """Bracket-definition ``h`` at ``p`` in the frame ``(d/dx, d/dy)``."""
    h, _, _ = _bracket_projector(S, p, 0)
    return np.array([[_value(v) for v in row] for row in h])


def jacobi_endomorphism_full(S: SprayField, p: TangentSample) -> np.ndarray:
    """``(Id - h) o [S, h]`` at ``p`` as a ``2n x 2n`` frame matrix.

    ``[S, K]`` for a (1,1)-tensor ``K`` has components
    ``S(K^B_A) - K^C_A dS^B/dz^C + K^B_C dS^C/dz^A``.
    """
    m = 2 * S.dim
    h, Svec, DS = _bracket_projector(S, p, 1)
    s_val = np.array([v.value for v in Svec])
    ds_val = np.array([[_value(v) for v in row] for row in DS])
    h_val = np.array([[_value(v) for v in row] for row in h])
    # directional derivative of each entry of h along S
    Sh = np.zeros((m, m))
    for a in range(m):
        for b in range(m):
            e = h[a][b]
            if isinstance(e, Jet):
                Sh[a, b] = float(np.dot(s_val, e.gradient()))
    bracket = Sh - ds_val @ h_val + h_val @ ds_val
    return (np.eye(m) - h_val) @ bracket


def jacobi_endomorphism(S: SprayField, p: TangentSample) -> np.ndarray:
    """Jacobi endomorphism ``Phi^i_j`` at ``p`` via the bracket definition."""
    n = S.dim
    return jacobi_endomorphism_full(S, p)[n:, :n]


def jacobi_endomorphism_coordinates(S: SprayField, p: TangentSample) -> np.ndarray:
    """Closed-form ``Phi^i_j = 2 G^i_{x^j} - S(N^i_j) - N^i_m N^m_j``."""
    n = S.dim
    y = p.y
    G = np.empty(n)
    grad = np.empty((n, 2 * n))
    hess = np.empty((n, 2 * n, 2 * n))
    for i, j in enumerate(S.jets(p, 2)):
        G[i] = j.value
        grad[i] = j.gradient()
        hess[i] = j.hessian()
    Gx = grad[:, :n]
    N = grad[:, n:]
    # S(N^i_j) = y^k d_{x^k} N^i_j - 2 G^k d_{y^k} N^i_j
    SN = np.einsum("k,ikj->ij", y, hess[:, :n, n:]) - 2.0 * np.einsum(
        "k,ikj->ij", G, hess[:, n:, n:]
    )
    return 2.0 * Gx - SN - N @ N


def ricci_scalar(Phi: np.ndarray, n: int) -> float:
    if n < 2:
        raise ValueError("the Ricci scalar needs n >= 2")
    return float(np.trace(Phi)) / (n - 1)


@dataclass(frozen=True)
class IsotropyResult:
    rho: float
    alpha: np.ndarray
    residual: float
    contraction: float  # i_S alpha = alpha_j y^j


def isotropy_decompose(S: SprayField, p: TangentSample, Phi: np.ndarray | None = None,
                       tol: float = TOLERANCES.rel) -> IsotropyResult:
    """Fit ``Phi = rho Id - y (x) alpha`` at ``p``.

    ``alpha`` is the least-squares solution over all rows; ``residual`` is the
    Frobenius misfit relative to ``|Phi|``.  When the fit is good the identity
    ``alpha_j y^j = rho`` is asserted.
    """
    n = S.dim
    if Phi is None:
        Phi = jacobi_endomorphism(S, p)
    y = p.y
    rho = ricci_scalar(Phi, n)
    E = rho * np.eye(n) - Phi
    alpha = E.T @ y / float(y @ y)
    misfit = Phi - (rho * np.eye(n) - np.outer(y, alpha))
    residual = float(np.linalg.norm(misfit)) / (float(np.linalg.norm(Phi)) + TOLERANCES.abs_floor)
    contraction = float(alpha @ y)
    if residual < tol:
        scale = abs(rho) + TOLERANCES.abs_floor
        assert abs(contraction - rho) <= 1e3 * tol * scale, (
            f"i_S alpha = {contraction!r} differs from rho = {rho!r}"
        )
    return IsotropyResult(rho, alpha, residual, contraction)


def spray_derivative(S: SprayField, f: ScalarField, p: TangentSample, order: int = 0) -> Jet:
    """Jet of ``S(f) = y^k df/dx^k - 2 G^k df/dy^k`` to the given order."""
    n = S.dim
    fj = f.jet(p, order + 1)
    y = _jet.variables(p.z, order)[n:]
    G = S.jets(p, order)
    out = 0.0
    for k in range(n):
        out = out + y[k] * fj.diff(k) - 2.0 * G[k] * fj.diff(n + k)
    return _jet.as_jet(out, 2 * n, order)


def complete_lift_field(a: ScalarField, check_basic: bool = True) -> ScalarField:
    """``a^c = y^i da/dx^i`` for a function ``a`` of the base point only.

    With ``check_basic`` every evaluation verifies ``da/dy = 0`` and raises
    :class:`~spraylab.errors.NotBasic` otherwise.
    """
    from .errors import NotBasic

    n = a.dim

    def jet_fn(p, order):
        aj = a.jet(p, order + 1)
        if check_basic:
            dy = aj.gradient()[n:]
            if np.any(np.abs(dy) > 0.0):
                raise NotBasic(f"{a.name} depends on the fiber coordinates at {p!r}")
        y = _jet.variables(p.z, order)[n:]
        out = 0.0
        for i in range(n):
            out = out + y[i] * aj.diff(i)
        return out

    return ScalarField(a.chart, jet_fn, None if a.max_order is None else a.max_order - 1,
                       f"({a.name})^c")
