import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dunklab.core import build_structure
from dunklab.fock import (FockVector, chaotic_transform, coherent_state, resolution_check,
                          transform_matrix)
from dunklab.hermite import HermiteFunctionEvaluator
from dunklab.kernels import KernelDomainError, dunkl_kernel_closed
from dunklab.poly import orthonormal_basis


def test_ground_state_maps_to_vacuum(b1_half):
    fv = chaotic_transform(b1_half, {(0,): 1.0}, max_degree=10)
    arr = fv.array(b1_half.indices(10))
    assert arr[0] == pytest.approx(1, abs=1e-13)
    assert np.max(np.abs(arr[1:])) < 1e-13


def test_h2_maps_to_phi2(b1_half):
    fv = chaotic_transform(b1_half, {(2,): 1.0}, max_degree=12)
    arr = fv.array(b1_half.indices(12))
    assert arr[2] == pytest.approx(1, abs=1e-8)
    assert np.max(np.abs(np.delete(arr, 2))) <= 1e-8


def test_norm_preserved():
    hb = orthonormal_basis(build_structure(2, [0.5, 1.0]), 8)
    fv = chaotic_transform(hb, {(0, 0): 1 / math.sqrt(2), (1, 0): 1 / math.sqrt(2)})
    assert fv.norm() == pytest.approx(1, abs=1e-13)


def test_transform_matrix_identity_high_degree():
    hb = orthonormal_basis(build_structure(1, [0.25]), 100)
    m = transform_matrix(hb, 60)
    assert np.max(np.abs(m - np.eye(61))) < 1e-10


def test_callable_input(b1_zero):
    # h_1 given pointwise
    f = lambda x: math.sqrt(2) * x[:, 0] * np.exp(-x[:, 0] ** 2 / 2)
    fv = chaotic_transform(b1_zero, f, max_degree=6)
    assert fv.coefficients[(1,)] == pytest.approx(1, abs=1e-13)


def test_nonfinite_integrand_rejected(b1_zero):
    with pytest.raises(FloatingPointError), np.errstate(over="ignore"):
        chaotic_transform(b1_zero, lambda x: np.exp(x[:, 0] ** 4), max_degree=4)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                min_size=15, max_size=15))
def test_unitarity_on_random_vectors(coeffs):
    hb = orthonormal_basis(build_structure(2, [0.3, 0.8]), 8)
    idx = hb.indices(4)
    f = dict(zip(idx, coeffs))
    fv = chaotic_transform(hb, f, max_degree=8)
    expected = math.sqrt(sum(abs(c) ** 2 for c in coeffs))
    assert fv.norm() == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert fv.distance(FockVector(f, 8)) <= 1e-12 * max(1, expected)


def test_coherent_at_origin_is_ground_state(b1_half):
    cs = coherent_state(b1_half, [0.0])
    arr = cs.fock.array(b1_half.indices())
    assert arr[0] == 1 and np.all(arr[1:] == 0)
    x = np.linspace(-2, 2, 5)
    assert np.allclose(cs.pointwise(x), HermiteFunctionEvaluator(b1_half)((0,), x))


def test_gaussian_coherent_state(b1_zero):
    z = 0.8
    cs = coherent_state(b1_zero, [z])
    for m in range(10):
        assert cs.fock.coefficients[(m,)] == pytest.approx(z ** m / math.sqrt(math.factorial(m)), rel=1e-13)


def test_coherent_pointwise_vs_coefficients(b1_one):
    cs = coherent_state(b1_one, [0.5], w=0.8)
    x = np.array([0.0, 0.7, -0.7])
    assert np.allclose(cs.pointwise(x), cs.from_coefficients(x), rtol=1e-9, atol=0)


def test_coherent_norm_is_kernel_on_diagonal(b2_small):
    z = np.array([0.6 + 0.2j, -0.4j])
    cs = coherent_state(b2_small, z)
    assert cs.norm_squared() == pytest.approx(dunkl_kernel_closed(b2_small.structure, z, z.conj()).real,
                                              rel=1e-13)
    with pytest.raises(KernelDomainError):
        coherent_state(b2_small, [4.0, 4.0])


def test_resolution_examples(b1_half):
    lhs, rhs = resolution_check(b1_half, {(0,): 1}, {(0,): 1})
    assert lhs == pytest.approx(1) and rhs == pytest.approx(1)
    lhs, rhs = resolution_check(b1_half, {(1,): 1}, {(2,): 1})
    assert abs(lhs) < 1e-13 and abs(rhs) < 1e-13
    rng = np.random.default_rng(9)
    idx = b1_half.indices(10)
    f = {idx[i]: complex(*rng.normal(size=2)) for i in rng.choice(len(idx), 6, replace=False)}
    g = {idx[i]: complex(*rng.normal(size=2)) for i in rng.choice(len(idx), 6, replace=False)}
    lhs, rhs = resolution_check(b1_half, f, g)
    assert abs(lhs - rhs) <= 1e-8 * max(1, abs(rhs))
