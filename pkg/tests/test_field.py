import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvetrak import FieldModel
from curvetrak.errors import CriticalPointError, FieldError
from curvetrak.field import (compute_bounds, field_eval, field_grad, field_grad_fd, field_hessian,
                             level_curvature)

from conftest import circle, linear_x


def test_values(ellipse, matyas):
    assert field_eval(ellipse, (20, 20)) == 0
    assert field_eval(ellipse, (30, 20)) == 100
    assert field_eval(matyas, (1, 1)) == pytest.approx(0.04, abs=1e-15)


def test_gradients(ellipse, matyas):
    np.testing.assert_array_equal(field_grad(ellipse, (30, 20)), [20, 0])
    np.testing.assert_allclose(field_grad(matyas, (1, 1)), [0.04, 0.04], atol=1e-15)
    np.testing.assert_array_equal(field_grad(ellipse, (20, 20)), [0, 0])


def test_fd_gradient_oracle(ellipse, matyas):
    np.testing.assert_allclose(field_grad_fd(matyas, (1, 1), 1e-4), [0.04, 0.04], atol=1e-8)
    np.testing.assert_allclose(field_grad_fd(ellipse, (30, 20), 1e-4), [20, 0], atol=1e-8)
    # differences of a linear field are exact when p and h are dyadic ...
    for h in (2.0 ** -10, 0.5, 8.0):
        np.testing.assert_array_equal(field_grad_fd(linear_x(), (3.5, -1.25), h), [1, 0])
    # ... and exact up to rounding of x +/- h otherwise
    for h in (1e-3, 0.3, 7.0):
        np.testing.assert_allclose(field_grad_fd(linear_x(), (3.3, -1.2), h), [1, 0], rtol=0, atol=1e-12)
    with pytest.raises(ValueError):
        field_grad_fd(ellipse, (0, 0), 0.0)


def test_hessians(ellipse, matyas):
    np.testing.assert_array_equal(field_hessian(ellipse, (3, -7)), [[2, 0], [0, 16]])
    np.testing.assert_allclose(field_hessian(matyas, (5, 2)), [[0.52, -0.48], [-0.48, 0.52]])
    cube = FieldModel.polynomial([(3, 0, 1.0)])
    np.testing.assert_array_equal(field_hessian(cube, (2, 0)), [[12, 0], [0, 0]])


def test_curvature(ellipse):
    # vertex of the level-100 ellipse: semi-axes 10 and sqrt(12.5), curvature 10 / 12.5
    assert level_curvature(ellipse, (30, 20)) == pytest.approx(0.8, rel=1e-12)
    assert level_curvature(circle(), (2, 0)) == pytest.approx(0.5, rel=1e-12)
    assert level_curvature(linear_x(), (4, 9)) == 0
    with pytest.raises(CriticalPointError):
        level_curvature(ellipse, (20, 20))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 40), st.floats(0, 2 * math.pi))
def test_circle_curvature_is_inverse_radius(r, th):
    assert level_curvature(circle(), (r * math.cos(th), r * math.sin(th))) == pytest.approx(1 / r, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), st.floats(-3, 3)), min_size=1, max_size=6),
       st.floats(-2, 2), st.floats(-2, 2))
def test_polynomial_gradient_matches_central_differences(terms, x, y):
    terms = [(i, j, c) for i, j, c in terms if i + j <= 4]
    if not terms:
        return
    f = FieldModel.polynomial(terms)
    g = field_grad(f, (x, y))
    fd = field_grad_fd(f, (x, y), 1e-5)
    assert np.max(np.abs(g - fd)) <= 1e-6 * max(1.0, np.max(np.abs(g)))


def test_rejects_bad_models():
    with pytest.raises(FieldError):
        FieldModel.polynomial([(4, 3, 1.0)])
    with pytest.raises(FieldError):
        FieldModel.polynomial([])
    with pytest.raises(FieldError):
        FieldModel.ellipse(coeff_x=math.inf)
    with pytest.raises(FieldError):
        field_eval(FieldModel.ellipse(), (math.nan, 0))


def test_spec_round_trip(ellipse):
    for f in (ellipse, FieldModel.matyas(), circle()):
        assert FieldModel.from_spec(f.to_spec()) == f


def test_bounds(ellipse):
    b = compute_bounds(ellipse)
    assert b.estimated
    assert b.z_min == pytest.approx(0, abs=1e-9)
    assert b.z_max == pytest.approx(30 ** 2 + 8 * 30 ** 2)
    assert b.grad_min == pytest.approx(0, abs=1e-9)
