import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import fd_module as fd
from errors_module import DomainError


def test_central_derivative_of_exp():
    assert fd.central_derivative(math.exp, 1.0) == pytest.approx(math.e, rel=1e-9)
    # the step never drops below 1e-8
    assert fd.eos_step(0.0) == 1e-8
    assert fd.eos_step(10.0) == pytest.approx(1e-5)


def test_gradient_of_smooth_function():
    def f(x):
        return math.sin(x[0]) * x[1] ** 3 + math.exp(x[2])

    x = np.array([0.7, 1.3, -0.2])
    expected = [math.cos(0.7) * 1.3 ** 3, 3.0 * math.sin(0.7) * 1.3 ** 2, math.exp(-0.2)]
    assert_allclose(fd.gradient(f, x), expected, rtol=1e-10)


def test_jacobian_of_vector_map():
    def F(x):
        return np.array([x[0] * x[1], x[1] ** 2 - x[0], math.log(x[0])])

    x = np.array([2.0, 3.0])
    expected = np.array([[3.0, 2.0], [-1.0, 6.0], [0.5, 0.0]])
    assert_allclose(fd.jacobian(F, x), expected, rtol=1e-10, atol=1e-12)


def test_hessian_of_polynomial_is_exact():
    def f(x):
        return x[0] ** 3 * x[1] + 2.0 * x[1] ** 2 - x[0] * x[2] ** 2

    x = np.array([1.5, -0.5, 2.0])
    expected = np.array([
        [6.0 * 1.5 * -0.5, 3.0 * 1.5 ** 2, -2.0 * 2.0],
        [3.0 * 1.5 ** 2, 4.0, 0.0],
        [-2.0 * 2.0, 0.0, -2.0 * 1.5],
    ])
    assert_allclose(fd.hessian(f, x), expected, rtol=1e-8, atol=1e-8)


def test_directional_derivative():
    def f(x):
        return x[0] ** 2 + 3.0 * x[1]

    d = np.array([1.0, -2.0])
    assert fd.directional_derivative(f, np.array([1.0, 1.0]), d) == pytest.approx(2.0 - 6.0, rel=1e-10)
    assert fd.directional_derivative(f, np.array([1.0, 1.0]), np.zeros(2)) == 0.0


def test_step_shrinks_near_the_admissible_boundary():
    x = np.array([1e-3])

    def ok(y):
        return bool(y[0] > 0)

    # scale 1 puts x - 2h at -1e-3; one shrink is enough
    grad = fd.gradient(lambda y: y[0] ** 3, x, scale=[1.0], admissible=ok)
    assert grad[0] == pytest.approx(3e-6, rel=1e-9)


def test_domain_errors_also_shrink_the_step():
    def f(y):
        if y[0] <= 0:
            raise DomainError("outside the domain")
        return y[0] ** 3

    assert fd.gradient(f, np.array([1e-3]), scale=[1.0])[0] == pytest.approx(3e-6, rel=1e-9)


def test_no_admissible_stencil_raises():
    with pytest.raises(DomainError):
        fd.gradient(lambda y: y[0], np.array([1.0]), admissible=lambda y: False)
