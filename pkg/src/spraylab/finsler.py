"""Finsler functions, their geodesic sprays and flag-curvature fits.

Regularity of ``F`` is tested through the fiber Hessian of ``F^2``: in
induced coordinates the 2-form ``dd_J F^2`` has the block form
``[[A, -g'], [g', 0]]`` with ``g'_ij = d^2F^2/dy^i dy^j``, so it is
symplectic exactly when ``det g' != 0``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import jet as _jet
from .coords import TOLERANCES, Chart, ScalarField, TangentSample
from .errors import DegenerateMetric, DomainError
from .expr import field_from_expression
from .jet import Jet
from .spraycalc import SprayField, complete_lift_field, connection, jacobi_endomorphism

__all__ = [
    "FinslerFunction",
    "MetricData",
    "SFCResult",
    "metric_tensor",
    "geodesic_spray",
    "geodesic_equation_residual",
    "metrizability_residual",
    "sfc_form",
    "scalar_flag_decompose",
    "euclidean",
    "constant_metric",
    "poincare",
    "one_form_metric",
    "from_expression",
    "builtin_metric",
]


class FinslerFunction:
    """A candidate Finsler function ``F`` (declared 1-homogeneous)."""

    declared_degree = 1

    def __init__(self, F: ScalarField, name: str | None = None):
        self.F = F
        self.name = name or F.name
        self.F2 = F * F
        self.F2.name = f"({self.name})^2"
        self._spray: SprayField | None = None

    @property
    def chart(self) -> Chart:
        return self.F.chart

    @property
    def dim(self) -> int:
        return self.F.dim

    def __repr__(self):
        return f"FinslerFunction({self.name!r}, dim={self.dim})"

    def check(self, samples: Sequence[TangentSample], tol: float = 1e-9) -> None:
        """Sample-based validation: positivity, 1-homogeneity, regularity."""
        from .expr import homogeneity_degree

        for p in samples:
            if self.F.value(p) <= 0:
                raise DomainError(f"{self.name} is not positive at {p!r}")
            d = homogeneity_degree(self.F, p, tol)
            if abs(d - 1.0) > tol:
                raise DomainError(f"{self.name} has degree {d!r} at {p!r}")
            if metric_tensor(self, p).degenerate:
                raise DegenerateMetric(f"{self.name} is degenerate at {p!r}")


@dataclass(frozen=True)
class MetricData:
    g: np.ndarray
    g_inv: np.ndarray | None
    det: float
    condition_estimate: float
    degenerate: bool


def _degenerate(g: np.ndarray, det: float) -> bool:
    n = g.shape[0]
    scale = float(np.max(np.abs(g))) ** n
    return scale == 0.0 or abs(det) < TOLERANCES.degenerate_det * scale


def metric_tensor(F: FinslerFunction, p: TangentSample) -> MetricData:
    """``g_ij = (1/2) d^2 F^2 / dy^i dy^j`` at ``p``."""
    n = F.dim
    g = 0.5 * F.F2.jet(p, 2).hessian()[n:, n:]
    det = float(np.linalg.det(g))
    degenerate = _degenerate(g, det)
    if degenerate:
        return MetricData(g, None, det, float("inf"), True)
    return MetricData(g, np.linalg.inv(g), det, float(np.linalg.cond(g)), False)


def _geodesic_jets(F2: ScalarField, n: int, p: TangentSample, order: int) -> list[Jet]:
    """Jets of ``G^i = g^{ik} (y^j F2_{y^k x^j} - F2_{x^k}) / 4``.

    The linear system ``g G = r / 4`` is solved in jet arithmetic by the
    fixed-point iteration ``G <- g0^{-1} (r/4 - (g - g0) G)``; each pass
    fixes one more Taylor order because ``g - g0`` vanishes at ``p``.
    """
    big = F2.jet(p, order + 2)
    dx = [big.diff(k) for k in range(n)]
    dy = [big.diff(n + k) for k in range(n)]
    y = _jet.variables(p.z, order)[n:]
    g = [[0.5 * dy[k].diff(n + l) for l in range(n)] for k in range(n)]
    rhs = []
    for k in range(n):
        s = -dx[k].truncate(order)
        for j in range(n):
            s = s + y[j] * dy[k].diff(j)
        rhs.append(0.25 * s)
    g0 = np.array([[e.value for e in row] for row in g])
    det = float(np.linalg.det(g0))
    if _degenerate(g0, det):
        raise DegenerateMetric(f"fiber Hessian of {F2.name} is singular at {p!r}")
    g0inv = np.linalg.inv(g0)
    delta = [[g[k][l] - g0[k, l] for l in range(n)] for k in range(n)]
    G = [sum(g0inv[i, k] * rhs[k] for k in range(n)) for i in range(n)]
    for _ in range(order):
        resid = [rhs[k] - sum(delta[k][l] * G[l] for l in range(n)) for k in range(n)]
        G = [sum(g0inv[i, k] * resid[k] for k in range(n)) for i in range(n)]
    return G


def geodesic_spray(F: FinslerFunction) -> SprayField:
    """Spray whose coefficients solve ``i_S dd_J F^2 = -dF^2``."""
    if F._spray is not None:
        return F._spray
    n = F.dim
    F2 = F.F2

    @lru_cache(maxsize=512)
    def cached(key, order):
        p = TangentSample(np.frombuffer(key[0]), np.frombuffer(key[1]))
        return _geodesic_jets(F2, n, p, order)

    coeffs = [
        ScalarField(F.chart, lambda p, k, i=i: cached(p.key(), k)[i],
                    None if F2.max_order is None else F2.max_order - 2, f"G{i + 1}[{F.name}]")
        for i in range(n)
    ]
    F._spray = SprayField(coeffs, F.chart, f"geodesic[{F.name}]")
    return F._spray


def _spray_vector(S: SprayField, p: TangentSample) -> np.ndarray:
    return np.concatenate([p.y, -2.0 * S.values(p)])


def geodesic_equation_residual(S: SprayField, F: FinslerFunction, p: TangentSample) -> float:
    """Normalized size of the 1-form ``i_S dd_J F^2 + dF^2`` on all 2n frame vectors.

    ``theta = d_J F^2`` has components ``(dF^2/dy^i, 0)``; ``d theta`` has
    matrix ``Omega_AB = d_A theta_B - d_B theta_A`` and
    ``(i_S d theta)_B = S^A Omega_AB``.
    """
    n = F.dim
    t = F.F2.jet(p, 2)
    dF2 = t.gradient()
    H = t.hessian()
    D = np.zeros((2 * n, 2 * n))  # D[A, B] = d_A theta_B
    D[:, :n] = H[:, n:]
    Omega = D - D.T
    form = _spray_vector(S, p) @ Omega + dF2
    return float(np.linalg.norm(form)) / (float(np.linalg.norm(dF2)) + TOLERANCES.abs_floor)


def metrizability_residual(S: SprayField, F: FinslerFunction, p: TangentSample) -> float:
    """Normalized ``|d_h F^2|`` with ``(d_h F^2)_j = F2_{x^j} - N^i_j F2_{y^i}``."""
    n = F.dim
    t = F.F2.jet(p, 1)
    grad = t.gradient()
    N = connection(S, p)
    dh = grad[:n] - N.T @ grad[n:]
    scale = abs(t.value) + float(np.linalg.norm(grad))
    return float(np.linalg.norm(dh)) / (scale + TOLERANCES.abs_floor)


def sfc_form(F: FinslerFunction, p: TangentSample) -> np.ndarray:
    """``F^2 Id - F y (x) d_J F``, the matrix multiplying kappa in the SFC form."""
    n = F.dim
    t = F.F.jet(p, 1)
    Fv = t.value
    Fy = t.gradient()[n:]
    return Fv * Fv * np.eye(n) - Fv * np.outer(p.y, Fy)


@dataclass(frozen=True)
class SFCResult:
    kappa: float
    residual: float


def scalar_flag_decompose(S: SprayField, F: FinslerFunction, p: TangentSample,
                          Phi: np.ndarray | None = None) -> SFCResult:
    """Least-squares ``kappa`` with ``Phi ~ kappa (F^2 Id - F y (x) d_J F)``."""
    if F.F.value(p) <= 0:
        raise DomainError(f"{F.name} is not positive at {p!r}")
    if Phi is None:
        Phi = jacobi_endomorphism(S, p)
    B = sfc_form(F, p)
    kappa = float(np.sum(Phi * B) / np.sum(B * B))
    residual = float(np.linalg.norm(Phi - kappa * B)) / (
        float(np.linalg.norm(Phi)) + TOLERANCES.abs_floor
    )
    return SFCResult(kappa, residual)


# --- built-in metrics -------------------------------------------------------


def from_expression(src: str, chart: Chart, name: str | None = None) -> FinslerFunction:
    return FinslerFunction(field_from_expression(src, chart), name or src)


def euclidean(dim: int) -> FinslerFunction:
    return from_expression("sqrt(dot(y,y))", Chart.euclidean(dim), "euclidean")


def poincare(dim: int) -> FinslerFunction:
    """Hyperbolic metric ``2|y| / (1 - |x|^2)`` on the unit ball, curvature -1."""
    return from_expression("2*sqrt(dot(y,y))/(1 - dot(x,x))", Chart.ball(dim, 1.0),
                           "poincare")


def constant_metric(matrix) -> FinslerFunction:
    """Riemannian ``sqrt(y^T A y)`` for a constant symmetric positive definite ``A``."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("constant metric needs a square matrix")
    if not np.allclose(A, A.T):
        raise ValueError("constant metric matrix must be symmetric")
    if np.any(np.linalg.eigvalsh(A) <= 0):
        raise ValueError("constant metric matrix must be positive definite")
    n = A.shape[0]
    terms = [f"{float(A[i, j])!r}*y{i + 1}*y{j + 1}" for i in range(n) for j in range(n) if A[i, j] != 0]
    return from_expression(f"sqrt({' + '.join(terms)})", Chart.euclidean(n),
                           f"constant:{json.dumps(A.tolist())}")


def one_form_metric(a: str, b: str = "1", chart: Chart | None = None, dim: int = 2
                    ) -> FinslerFunction:
    """Degenerate ``F(x, y) = b(x) da(y)``; its fiber Hessian has rank one."""
    chart = chart or Chart.ball(dim, 1.0)
    af = field_from_expression(a, chart)
    bf = field_from_expression(b, chart)
    F = bf * complete_lift_field(af)
    return FinslerFunction(F, f"oneform[b={b}, a={a}]")


def builtin_metric(spec: str, dim: int) -> FinslerFunction:
    """Resolve ``euclidean``, ``poincare``, ``constant:<json matrix>``,
    ``expr:<expression>`` or ``oneform:<a>``."""
    spec = spec.strip()
    if spec == "euclidean":
        return euclidean(dim)
    if spec == "poincare":
        return poincare(dim)
    kind, _, rest = spec.partition(":")
    if kind == "constant":
        m = constant_metric(json.loads(rest))
        if m.dim != dim:
            raise ValueError(f"constant metric is {m.dim}-dimensional, expected {dim}")
        return m
    if kind == "expr":
        return from_expression(rest, Chart.euclidean(dim), rest)
    if kind == "oneform":
        return one_form_metric(rest, dim=dim)
    raise ValueError(f"unknown metric {spec!r}")
