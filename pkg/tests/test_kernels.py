import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dunklab.core import build_structure
from dunklab.kernels import (KernelDomainError, KernelEvaluator, band_samples, dunkl_kernel_closed,
                             gaussian_pairing, kernel_bounds_check, kernel_value, log_rank1_kernel_pos,
                             rank1_kernel, rank1_kernel_mp, sandwiched_value)

cplx = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def test_kernel_at_zero_is_one(s2):
    z = np.array([1.3 - 0.2j, -0.7j])
    assert dunkl_kernel_closed(s2, z, np.zeros(2)) == pytest.approx(1.0)


def test_trivial_kernel_is_exponential(s1_zero):
    assert dunkl_kernel_closed(s1_zero, [1.0], [1.0]).real == pytest.approx(math.e, rel=1e-15)
    w = np.array([0.3, -4.0, 2 + 1j, 50.0])
    assert np.allclose(rank1_kernel(0.0, w), np.exp(w), rtol=1e-13)
    assert rank1_kernel(1.2, 0.0) == 1


@pytest.mark.parametrize("kappa", [0.0, 0.25, 0.5, 1.0, 2.75])
def test_rank1_against_mpmath(kappa):
    ws = [0.01, 0.5, -0.9, 1.0, 3.7, -6.0, 25.0, 1.5 + 2j, -3 + 0.5j, 8j, -0.999 + 0.01j]
    for w in ws:
        w = complex(w)
        ref = rank1_kernel_mp(kappa, w)
        got = complex(rank1_kernel(kappa, w))
        # left half-plane: the two Bessel terms cancel, so accuracy is absolute on the exp(|Re w|) scale
        scale = abs(ref) if w.real >= 0 else max(abs(ref), math.exp(abs(w.real)))
        assert abs(got - ref) <= 1e-13 * scale


@pytest.mark.parametrize("kappa", [0.0, 0.3, 1.0, 4.0])
def test_log_kernel_large_arguments(kappa):
    for w in [0.2, 5.0, 700.0, 1e5, 1e9, 1e12]:
        with mpmath.workdps(60):
            b = kappa + 0.5
            z = mpmath.mpf(w) ** 2 / 4
            j = mpmath.hyp0f1(b, z) + w / (2 * kappa + 1) * mpmath.hyp0f1(b + 1, z)
            ref = float(mpmath.log(j) - w)
        assert log_rank1_kernel_pos(kappa, np.array([w]))[0] == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_series_at_degree_60_matches_closed(b1_one):
    ev = KernelEvaluator(b1_one, truncation_degree=60)
    assert ev([0.7], [0.7]) == pytest.approx(complex(rank1_kernel(1.0, 0.49)), rel=1e-9)


def test_series_domain_guard(b1_half):
    ev = KernelEvaluator(b1_half, truncation_degree=10)
    with pytest.raises(KernelDomainError):
        ev([3.0], [3.0])
    # the fallback still answers
    assert kernel_value(ev, [3.0], [3.0]) == pytest.approx(complex(rank1_kernel(0.5, 9.0)))


@settings(max_examples=60, deadline=None)
@given(z1=cplx, z2=cplx, w1=cplx, w2=cplx)
def test_growth_bound(z1, z2, w1, w2):
    s = build_structure(2, [0.5, 1.0])
    z, w = np.array([z1, z2]), np.array([w1, w2])
    bound = math.exp(np.linalg.norm(z) * np.linalg.norm(w))
    assert abs(complex(dunkl_kernel_closed(s, z, w))) <= bound * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(z1=cplx, z2=cplx, w1=cplx, w2=cplx, lam=cplx)
def test_kernel_symmetries(z1, z2, w1, w2, lam):
    s = build_structure(2, [0.25, 2.0])
    z, w = np.array([z1, z2]), np.array([w1, w2])
    e = complex(dunkl_kernel_closed(s, z, w))
    tol = 1e-12 * math.exp(np.linalg.norm(z) * np.linalg.norm(w) * max(1, abs(lam)))
    assert abs(complex(dunkl_kernel_closed(s, w, z)) - e) <= tol
    assert abs(complex(dunkl_kernel_closed(s, lam * z, w)) - complex(dunkl_kernel_closed(s, z, lam * w))) <= tol
    assert abs(complex(dunkl_kernel_closed(s, z.conj(), w.conj())) - e.conjugate()) <= tol
    for i in range(2):
        g = np.ones(2)
        g[i] = -1
        assert abs(complex(dunkl_kernel_closed(s, g * z, g * w)) - e) <= tol


def test_kernel_solves_eigen_system():
    # T_x E(x, y) = y E(x, y), with T_j f = d_j f + kappa_j (f - f o r_j) / x_j
    s = build_structure(2, [0.5, 1.5])
    x, y = np.array([0.8, -0.6]), np.array([1.1, 0.4])
    f = lambda p: complex(dunkl_kernel_closed(s, p, y))
    h = 1e-5
    for j, k in enumerate(s.kappa):
        e = np.eye(2)[j]
        deriv = (f(x + h * e) - f(x - h * e)) / (2 * h)
        refl = x.copy()
        refl[j] *= -1
        t = deriv + k * (f(x) - f(refl)) / x[j]
        assert t == pytest.approx(y[j] * f(x), rel=1e-8)


def test_pairing_convention_examples(s1_zero, b1_zero, b1_half):
    lhs, rhs = gaussian_pairing(KernelEvaluator(b1_zero), 1.0, [0.0], [0.0])
    assert lhs == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert rhs == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    for ev in (KernelEvaluator(b1_zero), KernelEvaluator(b1_half)):
        lhs, rhs = gaussian_pairing(ev, 0.5, [0.0], [0.0])
        assert lhs == pytest.approx(1 / ev.structure.c_k) and rhs == pytest.approx(1 / ev.structure.c_k)


def test_pairing_complex_delta(b1_half):
    lhs, rhs = gaussian_pairing(KernelEvaluator(b1_half), 1 + 0.5j, [0.3], [0.2])
    assert abs(lhs - rhs) <= 1e-8 * abs(rhs)


def test_pairing_two_dimensions(b2_small):
    ev = KernelEvaluator(b2_small)
    lhs, rhs = gaussian_pairing(ev, 0.7 - 0.4j, [0.3 + 0.1j, -0.5], [0.2, 0.4j])
    assert abs(lhs - rhs) <= 1e-10 * abs(rhs)


def test_sandwich_trivial_band(s1_zero):
    rng = np.random.default_rng(11)
    eps0 = 0.5
    for x, y in band_samples(rng, 1, 50, eps0):
        v = sandwiched_value(s1_zero, x, y)
        assert 2 * math.exp(-eps0 ** 2 / 2) * (1 - 1e-9) <= v <= 2 * (1 + 1e-12)


def test_sandwich_diagonal_positive(s2):
    for x in ([0.0, 0.0], [3.0, -2.0], [5.5, 0.1]):
        v = sandwiched_value(s2, x, x)
        assert math.isfinite(v) and v > 0


def test_bounds_constant_stable(b1_one, tmp_path):
    ev = KernelEvaluator(b1_one)
    rng = np.random.default_rng(5)
    rep200 = kernel_bounds_check(ev, band_samples(rng, 1, 200, 0.5))
    rep400 = kernel_bounds_check(ev, rep200.samples + band_samples(rng, 1, 200, 0.5))
    assert rep200.constant >= 1
    assert rep400.constant <= 1.1 * rep200.constant
    assert rep400.saturated
    path = tmp_path / "bounds.csv"
    rep200.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "sample_id,x,y,sandwiched_value" and len(lines) == 201
