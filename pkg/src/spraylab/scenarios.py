"""Replays of the non-existence results as sampled numerical experiments.

Each runner evaluates a fixed list of checks at every grid sample and
summarises them in a :class:`ScenarioReport`.  Reports serialise to JSON
(shortest round-trip float repr, sorted keys) so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .coords import TOLERANCES, Chart, GridSpec, ScalarField, TangentSample, parallel_map, sample_grid
from .errors import PreconditionFailed
from .expr import field_from_expression
from .finsler import (
    FinslerFunction,
    geodesic_spray,
    metric_tensor,
    metrizability_residual,
    one_form_metric,
    scalar_flag_decompose,
    sfc_form,
)
from .jet import exp as jet_exp
from .projective import ProjectiveFactor, ball_funk, complete_lift, deform, funk_residual
from .spraycalc import SprayField, jacobi_endomorphism, spray_derivative

__all__ = [
    "SCHEMA_VERSION",
    "ScenarioSettings",
    "CheckSummary",
    "ScenarioReport",
    "run_theorem1",
    "run_proposition1",
    "run_flat_control",
]

SCHEMA_VERSION = "spraylab.scenario/1"


@dataclass(frozen=True)
class ScenarioSettings:
    """Thresholds shared by the scenario runners."""

    kappa_min: float = 1e-3
    zero_tol: float = 1e-9
    nonzero_floor: float = TOLERANCES.nonzero_floor
    annulus: tuple[float, float] = (0.3, 0.8)
    nonzero_fraction: float = 0.95
    sfc_tol: float = 1e-6
    chain_tol: float = 1e-8
    det_tol: float = TOLERANCES.degenerate_det
    funk_tol: float = 1e-8
    phi_tol: float = 1e-7
    ratio_tol: float = 1e-6
    constancy_tol: float = 1e-5


@dataclass
class CheckSummary:
    name: str
    description: str
    criterion: str  # "max<=", "min>=", "fraction>="
    threshold: float
    count: int
    min: float
    max: float
    mean: float
    passed: bool
    fraction: float | None = None
    fraction_required: float | None = None

    @classmethod
    def build(cls, name: str, description: str, values: Sequence[float], criterion: str,
              threshold: float, fraction_required: float | None = None) -> "CheckSummary":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            return cls(name, description, criterion, threshold, 0, float("nan"), float("nan"),
                       float("nan"), False, None, fraction_required)
        fraction = None
        if criterion == "max<=":
            passed = bool(np.max(v) <= threshold)
        elif criterion == "min>=":
            passed = bool(np.min(v) >= threshold)
        elif criterion == "fraction>=":
            fraction = float(np.count_nonzero(v > threshold)) / v.size
            passed = fraction >= fraction_required
        else:
            raise ValueError(f"unknown criterion {criterion!r}")
        return cls(name, description, criterion, threshold, int(v.size), float(np.min(v)),
                   float(np.max(v)), float(np.mean(v)), passed, fraction, fraction_required)


@dataclass
class ScenarioReport:
    scenario_id: str
    samples_tested: int
    checks: list[CheckSummary]
    provenance: dict = field(default_factory=dict)
    schema: str = SCHEMA_VERSION

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckSummary:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = "pass" if self.verdict else "fail"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScenarioReport":
        d = json.loads(text)
        d.pop("verdict", None)
        d["checks"] = [CheckSummary(**c) for c in d["checks"]]
        return cls(**d)

    def to_text(self) -> str:
        lines = [
            f"scenario {self.scenario_id}: {'PASS' if self.verdict else 'FAIL'}"
            f" ({self.samples_tested} samples)"
        ]
        for c in self.checks:
            tag = "pass" if c.passed else "FAIL"
            extra = ""
            if c.fraction is not None:
                extra = f" fraction={c.fraction:.4f} (need {c.fraction_required})"
            lines.append(
                f"  [{tag}] {c.name}: {c.criterion} {c.threshold:.3g}; "
                f"min={c.min:.6g} max={c.max:.6g} mean={c.mean:.6g}{extra}"
            )
            lines.append(f"         {c.description}")
        for k in sorted(self.provenance):
            lines.append(f"  {k} = {self.provenance[k]}")
        return "\n".join(lines) + "\n"


def _provenance(grid: GridSpec, extra: dict) -> dict:
    prov = {"grid": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(grid).items()}}
    prov["seed"] = grid.seed
    prov.update(extra)
    return json.loads(json.dumps(prov, sort_keys=True, default=repr))


def _norm_x(p: TangentSample) -> float:
    return float(np.linalg.norm(p.x))


# --- complete lifts on curved metrics (thm1) -----------------------------


def run_theorem1(F0: FinslerFunction, a: ScalarField | str, grid: GridSpec,
                 b: str = "1", settings: ScenarioSettings = ScenarioSettings(),
                 config: dict | None = None) -> ScenarioReport:
    """Check the proof chain for ``F0`` of non-vanishing flag curvature.

    The only deformation that could make ``S0 - 2PC`` metrizable is
    ``P = a^c`` for the conformal factor ``F = exp(2a) F0``; the report
    confirms it is not a Funk function and that the would-be solution
    ``F0 = b(x) da`` is degenerate.
    """
    chart = F0.chart
    a_src = a if isinstance(a, str) else a.name
    if isinstance(a, str):
        a = field_from_expression(a, chart)
    samples = sample_grid(chart, grid)
    S0 = geodesic_spray(F0)
    P = complete_lift(a)
    conformal = a.apply(lambda j: jet_exp(2.0 * j), f"exp(2 {a.name})") * F0.F
    degenerate = one_form_metric(a_src, b, chart=chart)
    n = chart.dim

    def per_sample(p: TangentSample):
        Phi = jacobi_endomorphism(S0, p)
        sfc = scalar_flag_decompose(S0, F0, p, Phi)
        ac = P.field.value(p)
        da_norm = float(np.linalg.norm(a.jet(p, 1).gradient()[:n]))
        S0F = spray_derivative(S0, conformal, p, 0).value
        chain = S0F / (2.0 * conformal.value(p))
        chain_err = abs(chain - ac) / (max(abs(ac), da_norm * float(np.linalg.norm(p.y)))
                                       + TOLERANCES.abs_floor)
        funk = funk_residual(S0, P, p).normalized
        md = metric_tensor(degenerate, p)
        scale = float(np.max(np.abs(md.g))) ** n
        det_ratio = abs(md.det) / scale if scale > 0 else 0.0
        return sfc.kappa, sfc.residual, ac, chain_err, funk, det_ratio

    rows = parallel_map(per_sample, samples)
    kappas = np.array([r[0] for r in rows])
    if np.min(np.abs(kappas)) < settings.kappa_min:
        raise PreconditionFailed(
            f"flag curvature of {F0.name} vanishes on the grid (min |kappa0| = "
            f"{np.min(np.abs(kappas)):.3g}); the scenario needs kappa0 != 0"
        )
    if max(abs(r[2]) for r in rows) < settings.zero_tol:
        raise PreconditionFailed(
            f"complete lift of a = {a_src} vanishes on the grid; the deformation factor "
            "must be non-vanishing"
        )
    lo, hi = settings.annulus
    annulus = [r[4] for p, r in zip(samples, rows) if lo <= _norm_x(p) <= hi]
    checks = [
        CheckSummary.build("sfc_form", "Phi0 = kappa0 (F0^2 J - F0 d_J F0 (x) C): relative fit residual",
                           [r[1] for r in rows], "max<=", settings.sfc_tol),
        CheckSummary.build("conformal_chain", "S0(e^{2a} F0) / (2 e^{2a} F0) = a^c: relative error",
                           [r[3] for r in rows], "max<=", settings.chain_tol),
        CheckSummary.build("funk_nonzero", f"normalized Funk residual of P = a^c for {lo} <= |x| <= {hi}",
                           annulus, "fraction>=", settings.nonzero_floor,
                           settings.nonzero_fraction),
        CheckSummary.build("degenerate_endpoint", "|det g| / max|g|^n for F = b(x) da(y)",
                           [r[5] for r in rows], "max<=", settings.det_tol),
    ]
    prov = _provenance(grid, {"metric": F0.name, "a": a_src, "b": b, "kappa0_mean":
                              float(np.mean(kappas)), **(config or {})})
    return ScenarioReport("thm1", len(samples), checks, prov)


# --- deformation by the metric itself (prop1) ----------------------------


def run_proposition1(F_tilde: FinslerFunction, lam: float, grid: GridSpec,
                     settings: ScenarioSettings = ScenarioSettings(),
                     config: dict | None = None) -> ScenarioReport:
    """Check that ``P = -lam F~`` is not a Funk function of ``S0 = S~ - 2 lam F~ C``."""
    chart = F_tilde.chart
    n = chart.dim
    if n < 3:
        raise PreconditionFailed(f"dimension {n} < 3; constant curvature needs dim >= 3")
    if lam == 0:
        raise PreconditionFailed("lambda must be non-zero")
    samples = sample_grid(chart, grid)
    S_tilde = geodesic_spray(F_tilde)
    fits = parallel_map(lambda p: scalar_flag_decompose(S_tilde, F_tilde, p), samples)
    kt = np.array([f.kappa for f in fits])
    if max(f.residual for f in fits) > settings.sfc_tol:
        raise PreconditionFailed(f"{F_tilde.name} is not of scalar flag curvature on the grid")
    if float(np.max(kt) - np.min(kt)) > settings.constancy_tol:
        raise PreconditionFailed(
            f"flag curvature of {F_tilde.name} is not constant (spread {np.ptp(kt):.3g})"
        )
    k_tilde = float(np.mean(kt))
    shifted = k_tilde + lam * lam
    if abs(shifted) < settings.zero_tol:
        raise PreconditionFailed(f"k~ + lambda^2 = {shifted:.3g} vanishes")

    P = ProjectiveFactor(-lam * F_tilde.F, f"-{lam!r} F~")
    S0 = deform(S_tilde, P)
    lam2 = lam * lam

    def per_sample(p: TangentSample):
        Phi0 = jacobi_endomorphism(S0, p)
        target = shifted * sfc_form(F_tilde, p)
        form_err = float(np.linalg.norm(Phi0 - target)) / (float(np.linalg.norm(target))
                                                           + TOLERANCES.abs_floor)
        t = F_tilde.F.jet(p, 1)
        Fv, dJF = t.value, t.gradient()[n:]
        fr = funk_residual(S0, P, p)
        expected_lhs = -2.0 * lam2 * Fv * dJF
        expected_rhs = lam2 * Fv * dJF
        lhs_err = float(np.linalg.norm(fr.lhs - expected_lhs)) / float(np.linalg.norm(expected_lhs))
        rhs_err = float(np.linalg.norm(fr.rhs - expected_rhs)) / float(np.linalg.norm(expected_rhs))
        big = np.abs(fr.rhs) > 1e-8 * float(np.max(np.abs(fr.rhs)))
        ratio_err = float(np.max(np.abs(fr.lhs[big] / fr.rhs[big] + 2.0)))
        target_norm = 3.0 * lam2 * Fv * float(np.linalg.norm(dJF))
        norm_err = abs(fr.norm - target_norm) / target_norm
        metr = metrizability_residual(S0, F_tilde, p)
        return form_err, ratio_err, lhs_err, rhs_err, norm_err, metr

    rows = parallel_map(per_sample, samples)
    col = lambda k: [r[k] for r in rows]  # noqa: E731
    checks = [
        CheckSummary.build("shifted_sfc_form",
                           "Phi0 = (k~ + lambda^2)(F~^2 J - F~ d_J F~ (x) C): relative error",
                           col(0), "max<=", settings.sfc_tol),
        CheckSummary.build("side_ratio", "componentwise |d_h0 P / (P d_J P) + 2|",
                           col(1), "max<=", settings.ratio_tol),
        CheckSummary.build("lhs_value", "d_h0 P = -2 lambda^2 F~ d_J F~: relative error",
                           col(2), "max<=", settings.ratio_tol),
        CheckSummary.build("rhs_value", "P d_J P = lambda^2 F~ d_J F~: relative error",
                           col(3), "max<=", settings.ratio_tol),
        CheckSummary.build("funk_norm", "|Funk residual| = 3 lambda^2 F~ |d_J F~|: relative error",
                           col(4), "max<=", settings.ratio_tol),
        CheckSummary.build("not_metrizable", "normalized |d_h0 F~^2| of S0 (nonzero)",
                           col(5), "min>=", settings.nonzero_floor),
    ]
    prov = _provenance(grid, {"metric": F_tilde.name, "lambda": lam, "k_tilde": k_tilde,
                              **(config or {})})
    return ScenarioReport("prop1", len(samples), checks, prov)


# --- flat positive control ---------------------------------------------------


def run_flat_control(grid: GridSpec, dim: int = 2,
                     settings: ScenarioSettings = ScenarioSettings(),
                     config: dict | None = None) -> ScenarioReport:
    """The flat spray on the unit ball and its deformation by the Funk function."""
    chart = Chart.ball(dim, 1.0)
    samples = sample_grid(chart, grid)
    S = SprayField.flat(chart)
    P = ball_funk(chart)
    S_def = deform(S, P)
    neg = -P

    def per_sample(p: TangentSample):
        phi = float(np.max(np.abs(jacobi_endomorphism(S, p))))
        funk = funk_residual(S, P, p).normalized
        phi_def = float(np.max(np.abs(jacobi_endomorphism(S_def, p))))
        funk_neg = funk_residual(S, neg, p).normalized
        return phi, funk, phi_def, funk_neg

    rows = parallel_map(per_sample, samples)
    col = lambda k: [r[k] for r in rows]  # noqa: E731
    checks = [
        CheckSummary.build("flat_phi_zero", "max |Phi| of the flat spray", col(0), "max<=",
                           settings.phi_tol),
        CheckSummary.build("funk_equation", "normalized Funk residual of the ball Funk function",
                           col(1), "max<=", settings.funk_tol),
        CheckSummary.build("deformed_phi_zero", "max |Phi| after deforming by the Funk function",
                           col(2), "max<=", settings.phi_tol),
        CheckSummary.build("negated_fails", "normalized Funk residual of -P (must be nonzero)",
                           col(3), "min>=", settings.nonzero_floor),
    ]
    prov = _provenance(grid, {"dim": dim, "factor": "funk", **(config or {})})
    return ScenarioReport("flat", len(samples), checks, prov)
