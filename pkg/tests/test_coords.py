import numpy as np
import pytest

from spraylab import (Chart, GridSpec, ScalarField, TangentSample, evaluate_tower,
                      sample_grid)
from spraylab.errors import DomainError, EmptyGridError
from spraylab.finsler import poincare
from oracles import fd_gradient, fd_hessian, field_fn


def test_constant_tower():
    f = ScalarField.constant(Chart.euclidean(2), 3.5)
    t = evaluate_tower(f, TangentSample([0.1, 0.2], [1, 0]), 2)
    assert t.value == 3.5
    assert not np.any(t.first) and not np.any(t.second)


def test_coordinate_tower():
    f = ScalarField.coordinate(Chart.euclidean(2), "y", 0)
    t = evaluate_tower(f, TangentSample([0.3, -0.4], [2, 1]), 1)
    assert t.value == 2
    np.testing.assert_array_equal(t.first, [0, 0, 1, 0])


def test_poincare_F2_tower_matches_finite_differences(rng):
    F = poincare(2)
    n = 2
    for _ in range(5):
        x = rng.uniform(-0.5, 0.5, n)
        y = rng.standard_normal(n)
        p = TangentSample(x, y)
        t = evaluate_tower(F.F2, p, 3)
        f = field_fn(F.F2, n)
        np.testing.assert_allclose(t.first, fd_gradient(f, p.z), rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(t.second, fd_hessian(f, p.z), rtol=1e-6, atol=1e-6)
        # third derivatives from differences of the exact Hessian
        h = 1e-5
        for k in range(2 * n):
            e = np.zeros(2 * n)
            e[k] = h
            hp = evaluate_tower(F.F2, TangentSample(*np.split(p.z + e, 2)), 2).second
            hm = evaluate_tower(F.F2, TangentSample(*np.split(p.z - e, 2)), 2).second
            np.testing.assert_allclose(t.third[:, :, k], (hp - hm) / (2 * h), rtol=1e-6,
                                       atol=1e-6)


def test_tower_is_symmetric():
    F = poincare(2)
    t = evaluate_tower(F.F2, TangentSample([0.2, 0.1], [0.3, -1.0]), 3)
    np.testing.assert_array_equal(t.second, t.second.T)
    np.testing.assert_array_equal(t.third, np.transpose(t.third, (1, 0, 2)))
    np.testing.assert_array_equal(t.third, np.transpose(t.third, (2, 1, 0)))


def test_inadmissible_point_is_rejected():
    F = poincare(2)
    with pytest.raises(DomainError):
        evaluate_tower(F.F, TangentSample([1.2, 0.0], [1, 0]), 1)
    with pytest.raises(DomainError):
        evaluate_tower(F.F, TangentSample([0.1, 0.0], [0, 0]), 1)


def test_origin_with_four_fibers():
    s = sample_grid(Chart.ball(2), GridSpec(base_points=((0.0, 0.0),), fibers=4))
    assert len(s) == 4
    assert all(np.linalg.norm(p.x) == 0 and np.any(p.y) for p in s)


def test_regular_grid_norm_filter():
    spec = GridSpec(counts=(10, 10), ranges=((-1, 1), (-1, 1)), max_norm=0.9)
    s = sample_grid(Chart.ball(2), spec)
    assert s and all(np.linalg.norm(p.x) <= 0.9 for p in s)


def test_seeded_grid_is_bitwise_reproducible():
    spec = GridSpec(samples=30, seed=42, max_norm=0.8, fibers=2)
    a = sample_grid(Chart.ball(3), spec)
    b = sample_grid(Chart.ball(3), spec)
    assert [p.key() for p in a] == [p.key() for p in b]


def test_empty_grid():
    with pytest.raises(EmptyGridError):
        sample_grid(Chart.ball(2), GridSpec(base_points=((2.0, 0.0),)))


def test_cone_closed_under_positive_scaling():
    chart = Chart(2, cone_predicate=lambda x, y: y[0] > 0, name="half")
    for p in sample_grid(chart, GridSpec(samples=20, seed=3, max_norm=1.0)):
        for lam in (0.5, 2.0, 7.0):
            q = p.scaled(lam)
            assert chart.admissible(q.x, q.y)


def test_samples_are_read_only():
    p = TangentSample([0.0, 1.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        p.x[0] = 3.0


def test_chart_needs_dim_two():
    with pytest.raises(ValueError):
        Chart.euclidean(1)
