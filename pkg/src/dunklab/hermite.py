"""Generalized Hermite functions, the Dunkl-Hermite eigenrelation, generating function and Mehler kernel."""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .core import DunklStructure
from .kernels import KernelEvaluator, ell, kernel_value
from .poly import HermiteBasis, Polynomial, dunkl_apply
from .quadrature import gauss_rule, integrate_weighted


def hermite_functions_1d(kappa: float, top: int, x) -> np.ndarray:
    """Rank-one ``h_0 .. h_top`` at real ``x`` by the orthonormal three-term recurrence.

    ``x h_m = sqrt(b_{m+1}) h_{m+1} + sqrt(b_m) h_{m-1}`` with
    ``b_m = m/2 + kappa [m odd]``, the recurrence of ``|x|^(2 kappa) exp(-x^2)``.
    Starting from ``h_0 = exp(-x^2/2)`` keeps the Gaussian inside every step,
    so nothing overflows and there is no cancellation between monomials.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (top + 1,))
    out[..., 0] = np.exp(-0.5 * x * x)
    if top == 0:
        return out
    b = np.sqrt(np.arange(top + 1) / 2 + kappa * (np.arange(top + 1) % 2))
    out[..., 1] = x * out[..., 0] / b[1]
    for m in range(1, top):
        out[..., m + 1] = (x * out[..., m] - b[m] * out[..., m - 1]) / b[m + 1]
    return out


@dataclass
class HermiteFunctionEvaluator:
    """``h_nu(x) = 2^(-|nu|/2) exp(-|x|^2/2) H_nu(x)``.

    Orthonormal for ``c_l2 * dw_k`` (see :class:`~dunklab.core.DunklStructure`).
    ``method="recurrence"`` (default) uses the coordinate factorization and a
    three-term recurrence, accurate for any real ``x``; ``method="polynomial"``
    evaluates the stored ``H_nu`` coefficients, which loses accuracy once
    ``|x|`` approaches the turning point ``sqrt(2|nu|)`` at high degree.
    """

    basis: HermiteBasis
    method: str = "recurrence"

    def __post_init__(self):
        if self.method not in ("recurrence", "polynomial"):
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def structure(self) -> DunklStructure:
        return self.basis.structure

    def values(self, x, indices=None):
        """Matrix ``h_nu(x)`` with shape ``(..., len(indices))``."""
        idx = self.basis.indices() if indices is None else [self.basis.check_index(nu) for nu in indices]
        x = np.asarray(x, dtype=float)
        if self.structure.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if self.method == "polynomial":
            hv = self.basis.hermite_values(x, idx).real
            scale = np.array([2.0 ** (-sum(nu) / 2) for nu in idx])
            return hv * scale * np.exp(-0.5 * np.sum(x * x, axis=-1))[..., None]
        nus = np.array(idx, dtype=int).reshape(-1, self.structure.n)
        out = np.ones(x.shape[:-1] + (len(idx),))
        for j, k in enumerate(self.structure.kappa):
            table = hermite_functions_1d(k, int(nus[:, j].max(initial=0)), x[..., j])
            out = out * table[..., nus[:, j]]
        return out

    def __call__(self, nu, x):
        return self.values(x, [nu])[..., 0]


def hermite_function(ev: HermiteFunctionEvaluator, nu, x):
    return ev(nu, x)


def gaussian_dunkl_apply(s: DunklStructure, j: int, f: Polynomial) -> Polynomial:
    """Polynomial part of ``T_j (f g)`` with ``g = exp(-|x|^2/2)``: ``T_j f - x_j f``.

    Holds because ``g`` is reflection invariant, so ``T_j (f g) = g T_j f + f d_j g``.
    """
    return dunkl_apply(s, j, f) - f.multiply_by_variable(j)


def hermite_operator_poly(s: DunklStructure, f: Polynomial) -> Polynomial:
    """``P`` with ``-1/2 (Delta_k - |x|^2)(f g) = P g``, computed exactly."""
    lap = Polynomial.zero(s.n)
    sq = Polynomial.zero(s.n)
    for j in range(s.n):
        lap = lap + gaussian_dunkl_apply(s, j, gaussian_dunkl_apply(s, j, f))
        sq = sq + f.multiply_by_variable(j).multiply_by_variable(j)
    return (lap - sq) * (-0.5)


@dataclass
class EigenReport:
    nu: tuple
    eigenvalue: float
    expected: float
    residual: float


def eigen_check(ev: HermiteFunctionEvaluator, nu) -> EigenReport:
    """Apply the Dunkl-Hermite operator symbolically to ``h_nu`` and read off the eigenvalue.

    The eigenvalue is the coefficient ratio on the leading monomial; the
    residual is ``max |P - mu H_nu| / max |H_nu|`` over coefficients.
    """
    s = ev.structure
    nu = ev.basis.check_index(nu)
    f = ev.basis.hermite[nu]
    image = hermite_operator_poly(s, f)
    mu = (image.coefficient(nu) / f.coefficient(nu)).real
    res = (image - f * mu).max_abs_coeff() / f.max_abs_coeff()
    return EigenReport(nu=nu, eigenvalue=mu, expected=sum(nu) + s.homogeneity, residual=res)


def generating_function_check(kev: KernelEvaluator, z, w, degree: int | None = None):
    """``(exp(-l(w)) E_k(2z, w), sum_{|nu|<=N} H_nu(z) phi_nu(w))``."""
    hb = kev.basis
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    lhs = cmath.exp(-complex(ell(w))) * kernel_value(kev, 2 * z, w)
    idx = hb.indices(degree)
    rhs = np.sum(hb.hermite_values(z, idx) * hb.phi_values(w, idx))
    return complex(lhs), complex(rhs)


def mehler_eval(kev: KernelEvaluator, r, x, y, degree: int | None = None):
    """Series and closed sides of the Mehler formula, ``|r| < 1``.

    ``sum H_nu(x) H_nu(y) (r/2)^|nu|`` against
    ``(1-r^2)^(-(gamma+n/2)) exp(-r^2 (|x|^2+|y|^2)/(1-r^2)) E_k(2rx/(1-r^2), y)``.
    """
    r = complex(r)
    if abs(r) >= 1:
        raise ValueError(f"need |r| < 1, got {r}")
    hb = kev.basis
    s = hb.structure
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    idx = hb.indices(degree)
    weights = np.array([(r / 2) ** sum(nu) for nu in idx])
    series = np.sum(hb.hermite_values(x, idx) * hb.hermite_values(y, idx) * weights)
    one = 1 - r * r
    closed = cmath.exp(-s.homogeneity * cmath.log(one)) \
        * cmath.exp(-r * r * complex(ell(x) + ell(y)) / one) \
        * kernel_value(kev, 2 * r * x / one, y)
    return complex(series), complex(closed)


def l2_gram(ev: HermiteFunctionEvaluator, max_degree: int, npts: int | None = None) -> np.ndarray:
    """``c_l2 int h_nu h_mu dw_k`` for ``|nu|, |mu| <= max_degree`` by Gaussian quadrature."""
    s = ev.structure
    idx = ev.basis.indices(max_degree)
    if npts is None:
        npts = max(s.quad_points, max_degree + 2)
    rule = gauss_rule(s, npts, beta=1.0)
    x = rule.nodes.real
    hv = ev.values(x, idx)
    return s.c_l2 * (hv.T * rule.free_weights) @ hv


def l2_gram_literal(ev: HermiteFunctionEvaluator, max_degree: int) -> np.ndarray:
    """Same Gram matrix with the ``c_k`` normalization; differs by ``2^(gamma+n/2)``."""
    s = ev.structure
    return l2_gram(ev, max_degree) * (s.c_k / s.c_l2)


def integrate_h_product(ev: HermiteFunctionEvaluator, nu, mu) -> float:
    s = ev.structure
    rule = gauss_rule(s, beta=1.0)
    f = ev.basis.hermite[ev.basis.check_index(nu)] * ev.basis.hermite[ev.basis.check_index(mu)]
    c = 2.0 ** (-(sum(nu) + sum(mu)) / 2)
    return s.c_l2 * c * integrate_weighted(s, lambda x: f(x), rule).real
