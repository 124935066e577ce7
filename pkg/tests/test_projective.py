import numpy as np
import pytest

from spraylab import Chart, ScalarField, SprayField, TangentSample
from spraylab.expr import field_from_expression
from spraylab.finsler import geodesic_spray, poincare
from spraylab.projective import (ProjectiveFactor, ball_funk, complete_lift, deform,
                                 deformed_connection, deformed_connection_residual,
                                 deformed_jacobi, deformed_jacobi_residual, funk_residual)
from spraylab.spraycalc import connection, jacobi_endomorphism
from conftest import ball_samples
from oracles import ball_funk as funk_closed_form
from oracles import fd_gradient, poincare_F

BALL2 = Chart.ball(2)


def _norm_factor(chart):
    return ProjectiveFactor.from_expression("sqrt(dot(y,y))", chart)


def test_zero_factor_is_identity():
    S = geodesic_spray(poincare(2))
    P = ProjectiveFactor.zero(BALL2)
    p = TangentSample([0.3, 0.2], [1.0, -0.5])
    np.testing.assert_array_equal(deform(S, P).values(p), S.values(p))
    assert deformed_connection_residual(S, P, p) == 0.0
    assert deformed_jacobi_residual(S, P, p) == 0.0
    fr = funk_residual(S, P, p)
    assert fr.norm == 0.0 and not np.any(fr.lhs) and not np.any(fr.rhs)


def test_flat_deformed_by_norm():
    S = deform(SprayField.flat(BALL2), _norm_factor(BALL2))
    p = TangentSample([0.1, 0.1], [3.0, 4.0])
    np.testing.assert_allclose(S.values(p), [15.0, 20.0])


def test_complete_lift_examples():
    assert complete_lift(ScalarField.constant(BALL2, 2.0)).field([0.1, 0], [1, 1]) == 0.0
    assert complete_lift(field_from_expression("x1", BALL2)).field([0.1, 0.5], [3, 4]) == 3.0
    P = complete_lift(field_from_expression("x1*x2", Chart.euclidean(2)))
    assert P.field([1, 2], [3, 4]) == 10.0
    p = TangentSample([0.2, 0.3], [1.0, -2.0])
    assert P.degree(TangentSample([0.2, 0.3], [1.0, 2.0])) == pytest.approx(1.0, abs=1e-12)
    assert P.field.value(p.scaled(3.0)) == pytest.approx(3 * P.field.value(p), rel=1e-15)


PAIRS = [
    ("flat", "norm"), ("flat", "funk"), ("flat", "lift"),
    ("poincare", "norm"), ("poincare", "lift"), ("poincare", "neg"),
]


def _pair(spray, factor):
    chart = BALL2
    F = poincare(2)
    S = SprayField.flat(chart) if spray == "flat" else geodesic_spray(F)
    P = {"norm": _norm_factor(chart), "funk": ball_funk(chart),
         "lift": complete_lift(field_from_expression("x1", chart)),
         "neg": ProjectiveFactor(-2.0 * F.F, "-2F")}[factor]
    return S, P


@pytest.mark.parametrize("spray,factor", PAIRS)
def test_transformation_laws(spray, factor):
    S, P = _pair(spray, factor)
    for p in ball_samples(2, 20, seed=7):
        assert deformed_connection_residual(S, P, p) < 1e-9
        assert deformed_jacobi_residual(S, P, p) < 1e-7
        np.testing.assert_allclose(connection(deform(S, P), p), deformed_connection(S, P, p),
                                   rtol=1e-9, atol=1e-9)
        Phi = jacobi_endomorphism(deform(S, P), p)
        np.testing.assert_allclose(Phi, deformed_jacobi(S, P, p),
                                   atol=1e-7 * max(1.0, np.max(np.abs(Phi))))


def test_ball_funk_closed_form_and_equation(rng):
    S = SprayField.flat(BALL2)
    P = ball_funk(BALL2)
    for p in ball_samples(2, 30, seed=3):
        assert P.field.value(p) == pytest.approx(funk_closed_form(p.x, p.y), rel=1e-14)
        # independent check of dP/dx = P dP/dy by finite differences
        gx = fd_gradient(lambda x: funk_closed_form(x, p.y), p.x)
        gy = fd_gradient(lambda y: funk_closed_form(p.x, y), p.y)
        np.testing.assert_allclose(gx, funk_closed_form(p.x, p.y) * gy, rtol=1e-6, atol=1e-8)
        fr = funk_residual(S, P, p)
        assert fr.norm < 1e-8 and fr.is_funk()


def test_funk_at_centre_is_norm():
    p = TangentSample([0.0, 0.0], [0.6, -0.8])
    P = ball_funk(BALL2)
    assert P.field.value(p) == pytest.approx(1.0, rel=1e-15)
    assert funk_residual(SprayField.flat(BALL2), P, p).norm < 1e-10


def test_negated_funk_fails():
    S = SprayField.flat(BALL2)
    P = -ball_funk(BALL2)
    bad = [funk_residual(S, P, p).normalized for p in ball_samples(2, 20, seed=3, min_norm=0.1)]
    assert min(bad) > 1e-3


def test_funk_deformation_preserves_curvature():
    """Where the Funk equation holds, Phi of the deformed spray equals Phi0."""
    S0 = SprayField.flat(BALL2)
    P = ball_funk(BALL2)
    checked = 0
    for p in ball_samples(2, 30, seed=11):
        if funk_residual(S0, P, p).norm < 1e-8:
            checked += 1
            Phi0 = jacobi_endomorphism(S0, p)
            Phi = jacobi_endomorphism(deform(S0, P), p)
            assert np.max(np.abs(Phi - Phi0)) <= 1e-6 * max(1.0, np.max(np.abs(Phi0)))
    assert checked == 30


def test_deform_inverse_is_exact():
    S = geodesic_spray(poincare(2))
    P = complete_lift(field_from_expression("x1", BALL2))
    back = deform(deform(S, P), -P)
    assert back is S
    assert -(-P) is P
    p = TangentSample([0.3, -0.4], [1.0, 0.2])
    np.testing.assert_array_equal(jacobi_endomorphism(back, p), jacobi_endomorphism(S, p))


def test_prop1_sides():
    F = poincare(3)
    lam = 2.0
    P = ProjectiveFactor(-lam * F.F, "-2F")
    S0 = deform(geodesic_spray(F), P)
    for p in ball_samples(3, 10, seed=4):
        Fv = poincare_F(p.x, p.y)
        dJF = fd_gradient(lambda y: poincare_F(p.x, y), p.y)
        fr = funk_residual(S0, P, p)
        np.testing.assert_allclose(fr.lhs, -2 * lam ** 2 * Fv * dJF, rtol=1e-6)
        np.testing.assert_allclose(fr.rhs, lam ** 2 * Fv * dJF, rtol=1e-6)
        np.testing.assert_allclose(fr.residual, -3 * lam ** 2 * Fv * dJF, rtol=1e-6)


def test_complete_lift_not_funk_for_poincare():
    S = geodesic_spray(poincare(2))
    P = complete_lift(field_from_expression("x1", BALL2))
    norms = [funk_residual(S, P, p).norm for p in ball_samples(2, 30, seed=9, min_norm=0.3)]
    assert min(norms) > 0.01


def test_factor_helpers():
    P = _norm_factor(BALL2)
    p = TangentSample([0.1, 0.2], [3.0, 4.0])
    assert P.scaled(2).field.value(p) == pytest.approx(10.0)
    assert P.degree(p) == pytest.approx(1.0)
    assert "funk" in repr(ball_funk(BALL2))
