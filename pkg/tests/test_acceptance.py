"""Exit criteria of the package, one test per criterion.

Each test records a one-line verdict; the lines are printed in the pytest
terminal summary, and also when this file is run as a script.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from spraylab import Chart, GridSpec, SprayField, sample_grid
from spraylab.finsler import (constant_metric, euclidean, geodesic_equation_residual,
                              geodesic_spray, metrizability_residual, poincare)
from spraylab.expr import field_from_expression
from spraylab.projective import (ProjectiveFactor, ball_funk, complete_lift,
                                 deformed_connection_residual, deformed_jacobi_residual)
from spraylab.scenarios import run_flat_control, run_proposition1, run_theorem1
from spraylab.spraycalc import connection, jacobi_endomorphism, jacobi_endomorphism_coordinates
from oracles import random_polynomial_spray

pytestmark = pytest.mark.acceptance

RESULTS: dict[int, str] = {}


def record(number: int, title: str, ok: bool, detail: str, started: float) -> None:
    RESULTS[number] = (f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail} "
                       f"({time.perf_counter() - started:.1f}s)")
    assert ok, RESULTS[number]


def _samples(chart, count, seed=0, max_norm=0.8):
    return sample_grid(chart, GridSpec(samples=count, seed=seed, max_norm=max_norm))


def _builtin_metrics():
    return [euclidean(2), euclidean(3), poincare(2), poincare(3),
            constant_metric([[2.0, 0.3], [0.3, 0.7]])]


def test_criterion_1_dual_path_curvature():
    t0 = time.perf_counter()
    poly_exprs, _ = random_polynomial_spray(np.random.default_rng(2024), 3, cubic=True)
    cases = {
        "flat": SprayField.flat(Chart.ball(2)),
        "poincare2": geodesic_spray(poincare(2)),
        "hyperbolic3": geodesic_spray(poincare(3)),
        "polynomial3": SprayField.from_expressions(poly_exprs, Chart.ball(3)),
    }
    worst = {}
    for name, S in cases.items():
        errs = []
        for p in _samples(S.chart, 100, seed=1):
            a = jacobi_endomorphism(S, p)
            b = jacobi_endomorphism_coordinates(S, p)
            scale = float(np.max(np.abs(b)))
            errs.append(float(np.max(np.abs(a - b))) / scale if scale > 0 else
                        float(np.max(np.abs(a))))
        worst[name] = max(errs)
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + " (need <= 1e-7)"
    record(1, "bracket Phi vs coordinate Phi", max(worst.values()) <= 1e-7, detail, t0)


def _builtin_pairs():
    for dim in (2, 3):
        chart = Chart.ball(dim)
        F = poincare(dim)
        sprays = {"flat": SprayField.flat(chart), "poincare": geodesic_spray(F)}
        factors = {
            "zero": ProjectiveFactor.zero(chart),
            "funk": ball_funk(chart),
            "lift:x1": complete_lift(field_from_expression("x1", chart)),
            "neg-metric:2": ProjectiveFactor(-2.0 * F.F, "-2F"),
        }
        for sn, S in sprays.items():
            for fn, P in factors.items():
                yield f"{sn}{dim}/{fn}", S, P


def test_criterion_2_transformation_laws():
    t0 = time.perf_counter()
    worst_n = worst_phi = 0.0
    pairs = 0
    for _, S, P in _builtin_pairs():
        pairs += 1
        for p in _samples(S.chart, 100, seed=2):
            worst_n = max(worst_n, deformed_connection_residual(S, P, p))
            worst_phi = max(worst_phi, deformed_jacobi_residual(S, P, p))
    ok = worst_n <= 1e-9 and worst_phi <= 1e-7
    detail = (f"{pairs} pairs x 100 samples, connection {worst_n:.2e} (<= 1e-9), "
              f"Jacobi {worst_phi:.2e} (<= 1e-7)")
    record(2, "deformation transformation laws", ok, detail, t0)


def test_criterion_3_flat_positive_control():
    t0 = time.perf_counter()
    rep = run_flat_control(GridSpec(samples=200, seed=0, max_norm=0.8))
    funk = rep.check("funk_equation")
    phi = rep.check("deformed_phi_zero")
    ok = rep.samples_tested == 200 and funk.max < 1e-8 and phi.max <= 1e-7
    detail = f"200 samples, Funk residual {funk.max:.2e} (< 1e-8), |Phi| {phi.max:.2e} (<= 1e-7)"
    record(3, "ball Funk deformation of the flat spray", ok, detail, t0)


def test_criterion_4_proposition_replay():
    t0 = time.perf_counter()
    rep = run_proposition1(poincare(3), 2.0, GridSpec(samples=200, seed=0, max_norm=0.8))
    form = rep.check("shifted_sfc_form").max
    ratio = rep.check("side_ratio").max
    norm = rep.check("funk_norm").max
    ok = (abs(rep.provenance["k_tilde"] + 1) < 1e-6 and form <= 1e-6 and ratio <= 1e-6
          and norm <= 1e-6)
    detail = f"(a) form {form:.2e}, (b) ratio {ratio:.2e}, (c) norm {norm:.2e} (each <= 1e-6)"
    record(4, "shifted curvature and non-Funk factor in dim 3", ok, detail, t0)


def test_criterion_5_theorem_replay():
    t0 = time.perf_counter()
    rep = run_theorem1(poincare(2), "x1", GridSpec(samples=200, seed=0, max_norm=0.8))
    sfc = rep.check("sfc_form")
    chain = rep.check("conformal_chain")
    funk = rep.check("funk_nonzero")
    det = rep.check("degenerate_endpoint")
    ok = (rep.samples_tested == 200 and sfc.max <= 1e-6 and chain.max <= 1e-8
          and funk.fraction >= 0.95 and funk.threshold == 1e-3 and det.max < 1e-12)
    detail = (f"(a) {sfc.max:.2e}, (b) {chain.max:.2e}, (c) fraction {funk.fraction:.3f} "
              f"of {funk.count} annulus samples > 1e-3, (d) |det|/scale {det.max:.2e}")
    record(5, "no complete lift repairs a curved metric", ok, detail, t0)


def test_criterion_6_metrizability_self_consistency():
    t0 = time.perf_counter()
    worst8 = worst9 = 0.0
    for F in _builtin_metrics():
        S = geodesic_spray(F)
        chart = F.chart if F.name != "euclidean" else Chart.ball(F.dim)
        for p in _samples(chart, 100, seed=6):
            worst8 = max(worst8, geodesic_equation_residual(S, F, p))
            worst9 = max(worst9, metrizability_residual(S, F, p))
    ok = worst8 < 1e-8 and worst9 < 1e-8
    detail = f"geodesic equation {worst8:.2e}, d_h F^2 {worst9:.2e} (< 1e-8)"
    record(6, "geodesic sprays of built-in metrics", ok, detail, t0)


def _degree_error(fn, p, degree):
    a = np.asarray(fn(p))
    b = np.asarray(fn(p.scaled(2.0)))
    return float(np.max(np.abs(b - 2.0 ** degree * a))) / (2.0 ** degree * float(np.max(np.abs(a)))
                                                           + 1e-300)


def test_criterion_7_homogeneity():
    t0 = time.perf_counter()
    worst = 0.0
    for F in _builtin_metrics():
        S = geodesic_spray(F)
        chart = Chart.ball(F.dim)
        for p in _samples(chart, 20, seed=7):
            if np.any(S.values(p)):
                worst = max(worst, _degree_error(S.values, p, 2))
                worst = max(worst, _degree_error(lambda q: connection(S, q), p, 1))
                worst = max(worst, _degree_error(lambda q: jacobi_endomorphism(S, q), p, 2))
            worst = max(worst, _degree_error(F.F.value, p, 1))
    for _, _, P in _builtin_pairs():
        for p in _samples(P.chart, 20, seed=7):
            if P.field.value(p) != 0.0:
                worst = max(worst, _degree_error(P.field.value, p, 1))
    record(7, "homogeneity degrees G 2, N 1, Phi 2, P 1", worst <= 1e-9,
           f"worst relative scale-doubling error {worst:.2e} (<= 1e-9)", t0)


def test_criterion_8_determinism():
    t0 = time.perf_counter()
    grid = GridSpec(samples=50, seed=17, max_norm=0.8)
    runs = {
        "thm1": lambda: run_theorem1(poincare(2), "x1", grid).to_json(),
        "prop1": lambda: run_proposition1(poincare(3), 2.0, grid).to_json(),
        "flat": lambda: run_flat_control(grid).to_json(),
    }
    same = {k: fn() == fn() for k, fn in runs.items()}
    record(8, "scenario reruns give byte-identical JSON", all(same.values()),
           ", ".join(f"{k} {'identical' if v else 'DIFFERENT'}" for k, v in same.items()), t0)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    for k in sorted(RESULTS):
        print(RESULTS[k])
