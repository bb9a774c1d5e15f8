import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dunklab.core import build_structure
from dunklab.hermite import (HermiteFunctionEvaluator, eigen_check, generating_function_check,
                             hermite_operator_poly, l2_gram, l2_gram_literal, mehler_eval)
from dunklab.kernels import KernelEvaluator
from dunklab.poly import orthonormal_basis


def test_ground_state(b2_small):
    ev = HermiteFunctionEvaluator(b2_small)
    x = np.array([[0.3, -1.2], [2.0, 0.1]])
    assert np.allclose(ev((0, 0), x), np.exp(-0.5 * np.sum(x * x, axis=1)))


def test_trivial_first_hermite_function(b1_zero):
    ev = HermiteFunctionEvaluator(b1_zero)
    x = np.linspace(-3, 3, 7)
    assert np.allclose(ev((1,), x), math.sqrt(2) * x * np.exp(-x * x / 2))


def test_h2_against_extended_precision():
    kappa, x = mpmath.mpf("0.5"), mpmath.mpf("1.3")
    with mpmath.workdps(40):
        # phi_2 = x^2 / sqrt([x^2, x^2]); Delta_k x^2 = 2 + 4 kappa; H_2 = 4 (phi_2 - Delta_k phi_2 / 4)
        c2 = 2 * (1 + 2 * kappa)
        phi2 = x ** 2 / mpmath.sqrt(c2)
        lap = (2 + 4 * kappa) / mpmath.sqrt(c2)
        h2 = mpmath.mpf(2) ** -1 * mpmath.exp(-x * x / 2) * 4 * (phi2 - lap / 4)
    ev = HermiteFunctionEvaluator(orthonormal_basis(build_structure(1, [0.5]), 4))
    assert ev((2,), [1.3]) == pytest.approx(float(h2), rel=1e-13)


@pytest.mark.parametrize("kappa,nu,expected", [(0.0, 0, 0.5), (0.0, 1, 1.5), (0.75, 2, 3.25)])
def test_eigenvalue_examples(kappa, nu, expected):
    ev = HermiteFunctionEvaluator(orthonormal_basis(build_structure(1, [kappa]), 4))
    rep = eigen_check(ev, (nu,))
    assert rep.eigenvalue == expected
    assert rep.residual < 1e-13


def test_eigen_residuals_two_dimensions(b2_small):
    ev = HermiteFunctionEvaluator(b2_small)
    for nu in b2_small.indices(12):
        rep = eigen_check(ev, nu)
        assert rep.residual < 1e-10
        assert rep.eigenvalue == pytest.approx(sum(nu) + 2.5, abs=1e-10)


def test_l2_gram_two_dimensions(b2_small):
    g = l2_gram(HermiteFunctionEvaluator(b2_small), 16)
    assert np.max(np.abs(g - np.eye(len(g)))) < 1e-12


def test_recurrence_matches_polynomial_route(b2_small, b1_half):
    rng = np.random.default_rng(2)
    for hb in (b2_small, b1_half):
        x = rng.uniform(-1.5, 1.5, (20, hb.structure.n))
        a = HermiteFunctionEvaluator(hb).values(x)
        b = HermiteFunctionEvaluator(hb, method="polynomial").values(x)
        assert np.max(np.abs(a - b)) < 1e-11


def test_high_degree_gram_needs_recurrence():
    hb = orthonormal_basis(build_structure(1, [0.25]), 100)
    g = l2_gram(HermiteFunctionEvaluator(hb), 100, npts=110)
    assert np.max(np.abs(g - np.eye(101))) < 1e-11
    # the monomial route cannot reach the outer quadrature nodes at this degree
    x = np.array([9.0])
    poly = HermiteFunctionEvaluator(hb, method="polynomial")((80,), x)
    rec = HermiteFunctionEvaluator(hb)((80,), x)
    assert abs(poly - rec) > 1e-6 * abs(rec)


def test_l2_gram_normalizations(b1_half):
    ev = HermiteFunctionEvaluator(b1_half)
    assert np.max(np.abs(l2_gram(ev, 40) - np.eye(41))) < 1e-12
    a = b1_half.structure.homogeneity
    assert np.allclose(l2_gram_literal(ev, 6), 2 ** -a * np.eye(7), atol=1e-14)


def test_generating_function_examples(b1_zero, b1_half):
    lhs, rhs = generating_function_check(KernelEvaluator(b1_half), [0.7], [0.0])
    assert lhs == pytest.approx(1) and rhs == pytest.approx(1)
    lhs, rhs = generating_function_check(KernelEvaluator(b1_zero), [0.0], [0.6])
    assert lhs == pytest.approx(math.exp(-0.36), rel=1e-15)
    assert rhs == pytest.approx(lhs, rel=1e-13)
    lhs, rhs = generating_function_check(KernelEvaluator(b1_half), [0.4], [0.3])
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)


def test_mehler_examples(b1_zero, b1_one):
    ser, closed = mehler_eval(KernelEvaluator(b1_zero), 0.5, [0.0], [0.0])
    assert closed == pytest.approx(0.75 ** -0.5, rel=1e-15)
    assert ser == pytest.approx(closed, rel=1e-13)
    ser, closed = mehler_eval(KernelEvaluator(b1_zero), 0.0, [1.1], [-0.4])
    assert ser == pytest.approx(1) and closed == pytest.approx(1)
    ser, closed = mehler_eval(KernelEvaluator(b1_one), 0.6, [0.8], [-0.5], degree=40)
    assert abs(ser - closed) < 1e-8 * abs(closed)
    with pytest.raises(ValueError):
        mehler_eval(KernelEvaluator(b1_one), 1.0, [0.0], [0.0])


def test_mehler_matches_classical_formula(b1_zero):
    # kappa = 0: the Mehler kernel in its textbook form
    r, x, y = 0.45, 0.9, -1.2
    ser, _ = mehler_eval(KernelEvaluator(b1_zero), r, [x], [y])
    classical = (1 - r * r) ** -0.5 * math.exp((2 * r * x * y - r * r * (x * x + y * y)) / (1 - r * r))
    assert ser == pytest.approx(classical, rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(x1=st.floats(-1.5, 1.5), x2=st.floats(-1.5, 1.5), y1=st.floats(-1.5, 1.5), y2=st.floats(-1.5, 1.5),
       rho=st.floats(0, 0.7), theta=st.floats(-math.pi, math.pi))
def test_mehler_two_dimensions_property(x1, x2, y1, y2, rho, theta):
    hb = orthonormal_basis(build_structure(2, [0.5, 1.0]), 64)
    kev = KernelEvaluator(hb)
    r = rho * complex(math.cos(theta), math.sin(theta))
    ser, closed = mehler_eval(kev, r, [x1, x2], [y1, y2])
    assert abs(ser - closed) <= 1e-8 * abs(closed)
    # symmetric in x and y
    ser2, _ = mehler_eval(kev, r, [y1, y2], [x1, x2])
    assert abs(ser2 - ser) <= 1e-12 * max(1, abs(ser))


def test_hermite_operator_on_gaussian_times_x(s1_half):
    # A(x g) for g = exp(-x^2/2): A(xg) = (3/2 + kappa) xg at kappa = 1/2
    from dunklab.poly import Polynomial
    p = hermite_operator_poly(s1_half, Polynomial.variable(1, 0))
    assert p == Polynomial.variable(1, 0) * 2.0
