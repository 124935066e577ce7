import numpy as np
import pytest

from spraylab import Chart, ScalarField, SprayField, TangentSample
from spraylab.errors import NotBasic
from spraylab.expr import field_from_expression
from spraylab.finsler import geodesic_spray, poincare
from spraylab.spraycalc import (complete_lift_field, connection, horizontal_projector,
                                horizontal_projector_coordinates, isotropy_decompose,
                                jacobi_endomorphism, jacobi_endomorphism_coordinates,
                                jacobi_endomorphism_full, ricci_scalar, spray_derivative)
from conftest import random_sample
from oracles import (coordinate_phi, fd_gradient, poincare_F, poincare_G,
                     random_polynomial_spray, sfc_form)


def _rel(a, b):
    return np.max(np.abs(a - b)) / (np.max(np.abs(b)) + 1e-10)


def test_flat_spray_is_trivial():
    S = SprayField.flat(Chart.euclidean(2))
    p = TangentSample([0.3, 0.1], [1.0, -2.0])
    assert not np.any(connection(S, p))
    assert not np.any(jacobi_endomorphism(S, p))
    iso = isotropy_decompose(S, p)
    assert (iso.rho, iso.residual) == (0.0, 0.0) and not np.any(iso.alpha)
    assert ricci_scalar(np.zeros((2, 2)), 2) == 0.0


def test_quadratic_coefficient_connection():
    S = SprayField.from_expressions(["y1^2", "0"], Chart.euclidean(2))
    N = connection(S, TangentSample([0.5, 0.5], [3.0, -1.0]))
    np.testing.assert_array_equal(N, [[6.0, 0.0], [0.0, 0.0]])


def test_poincare_spray_matches_closed_form(rng):
    S = geodesic_spray(poincare(2))
    for _ in range(10):
        p = random_sample(rng, 2)
        np.testing.assert_allclose(S.values(p), poincare_G(p.x, p.y), rtol=1e-12, atol=1e-14)
        fd = np.array([fd_gradient(lambda y, i=i: poincare_G(p.x, y)[i], p.y) for i in range(2)])
        np.testing.assert_allclose(connection(S, p), fd, rtol=1e-7, atol=1e-8)


@pytest.mark.parametrize("dim", [2, 3])
def test_euler_identity_and_projector(dim, rng):
    exprs, _ = random_polynomial_spray(rng, dim)
    S = SprayField.from_expressions(exprs, Chart.euclidean(dim))
    for _ in range(5):
        p = random_sample(rng, dim)
        N = connection(S, p)
        np.testing.assert_allclose(N @ p.y, 2 * S.values(p), rtol=1e-12, atol=1e-12)
        h = horizontal_projector(S, p)
        np.testing.assert_allclose(h, horizontal_projector_coordinates(N), atol=1e-12)
        np.testing.assert_allclose(h @ h, h, atol=1e-12)


def test_full_jacobi_is_semi_basic_and_vertical(rng):
    exprs, _ = random_polynomial_spray(rng, 3)
    S = SprayField.from_expressions(exprs, Chart.euclidean(3))
    full = jacobi_endomorphism_full(S, random_sample(rng, 3))
    mask = np.zeros((6, 6), dtype=bool)
    mask[3:, :3] = True
    assert np.max(np.abs(full[~mask])) < 1e-12 * max(1.0, np.max(np.abs(full)))


@pytest.mark.parametrize("dim", [2, 3])
def test_bracket_matches_coordinates_and_finite_differences(dim, rng):
    exprs, G = random_polynomial_spray(rng, dim, cubic=True)
    S = SprayField.from_expressions(exprs, Chart.euclidean(dim))
    for _ in range(10):
        p = random_sample(rng, dim)
        Phi = jacobi_endomorphism(S, p)
        assert _rel(Phi, jacobi_endomorphism_coordinates(S, p)) < 1e-12
        assert _rel(Phi, coordinate_phi(G, p.x, p.y)) < 1e-5


def test_jacobi_degree_two(rng):
    exprs, _ = random_polynomial_spray(rng, 2)
    S = SprayField.from_expressions(exprs, Chart.euclidean(2))
    p = random_sample(rng, 2)
    for lam in (0.5, 2.0, 3.0):
        np.testing.assert_allclose(jacobi_endomorphism(S, p.scaled(lam)),
                                   lam ** 2 * jacobi_endomorphism(S, p), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("dim", [2, 3])
def test_poincare_curvature_minus_one(dim, rng):
    S = geodesic_spray(poincare(dim))
    for _ in range(10):
        p = random_sample(rng, dim)
        Fv = poincare_F(p.x, p.y)
        dJF = fd_gradient(lambda y: poincare_F(p.x, y), p.y)
        target = -sfc_form(Fv, dJF, p.y)
        assert _rel(jacobi_endomorphism(S, p), target) < 1e-6
        # Ricci scalar of a unit vector
        unit = p.scaled(1.0 / Fv)
        assert ricci_scalar(jacobi_endomorphism(S, unit), dim) == pytest.approx(-1.0, abs=1e-6)
        iso = isotropy_decompose(S, p)
        assert iso.residual < 1e-10
        assert iso.contraction == pytest.approx(iso.rho, rel=1e-9)


def test_non_isotropic_detector(rng):
    exprs, _ = random_polynomial_spray(rng, 3, cubic=True)
    S = SprayField.from_expressions(exprs, Chart.euclidean(3))
    worst = max(isotropy_decompose(S, random_sample(rng, 3)).residual for _ in range(10))
    assert worst > 0.01


def test_spray_derivative_of_energy_vanishes_for_geodesic_spray(rng):
    F = poincare(2)
    S = geodesic_spray(F)
    for _ in range(5):
        p = random_sample(rng, 2)
        assert abs(spray_derivative(S, F.F2, p).value) < 1e-12 * F.F2.value(p)


def test_complete_lift_field():
    chart = Chart.euclidean(2)
    a = field_from_expression("x1*x2", chart)
    assert complete_lift_field(a)([1, 2], [3, 4]) == 10
    with pytest.raises(NotBasic):
        complete_lift_field(field_from_expression("x1*y2", chart))([1, 2], [3, 4])
    zero = complete_lift_field(ScalarField.constant(chart, 5.0))
    assert zero([0.3, 0.2], [1, 1]) == 0.0
