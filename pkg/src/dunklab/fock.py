"""Generalized Fock space in coefficient form, the chaotic transform and coherent states.

A Fock vector is stored by its coefficients in the orthonormal basis
``phi_nu``; no integral measure is used for the Fock inner product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DunklStructure
from .kernels import KernelDomainError, dunkl_kernel_closed, ell
from .hermite import HermiteFunctionEvaluator
from .poly import HermiteBasis
from .quadrature import QuadratureRule, gauss_rule

COHERENT_TAIL_TOL = 1e-14


@dataclass(frozen=True)
class FockVector:
    """``sum_nu a_nu phi_nu`` truncated at total degree ``truncation``."""

    coefficients: dict
    truncation: int

    def inner(self, other: "FockVector") -> complex:
        """``(f, g)_k = sum a_nu conj(b_nu)``, conjugate-linear in the second slot."""
        return complex(sum(a * np.conj(other.coefficients.get(nu, 0)) for nu, a in self.coefficients.items()))

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.coefficients.values()))

    def array(self, indices) -> np.ndarray:
        return np.array([self.coefficients.get(nu, 0) for nu in indices], dtype=complex)

    def distance(self, other: "FockVector") -> float:
        keys = set(self.coefficients) | set(other.coefficients)
        return math.sqrt(sum(abs(self.coefficients.get(k, 0) - other.coefficients.get(k, 0)) ** 2 for k in keys))


def _resolve_function(basis: HermiteBasis, f):
    # h-coefficient dicts become pointwise callables
    if callable(f):
        return f
    coeffs = dict(f)
    ev = HermiteFunctionEvaluator(basis)
    idx = sorted(coeffs, key=lambda nu: (sum(nu), tuple(-v for v in nu)))
    vals = np.array([coeffs[nu] for nu in idx], dtype=complex)
    return lambda x: ev.values(x, idx) @ vals


def chaotic_transform(basis: HermiteBasis, f, rule: QuadratureRule | None = None,
                      max_degree: int | None = None) -> FockVector:
    """``C_k f``: coefficients ``c_l2 int f h_nu dw_k`` for ``|nu| <= max_degree``.

    ``f`` is a callable on real points of shape ``(m, n)`` or a dict of
    h-coefficients. The default rule carries ``exp(-|x|^2)``, so
    ``f(x) exp(|x|^2/2)`` should be of polynomial type for exactness.
    """
    s = basis.structure
    top = basis.max_degree if max_degree is None else max_degree
    idx = basis.indices(top)
    if rule is None:
        rule = gauss_rule(s, max(s.quad_points, top + 2), beta=1.0)
    if rule.gaussian_scale != 1.0:
        raise ValueError("chaotic transform expects a rule with gaussian_scale 1")
    func = _resolve_function(basis, f)
    if rule.free_weights is None:
        raise ValueError("rule must carry Gaussian-free weights")
    x = rule.nodes.real
    fx = np.asarray(func(x), dtype=complex)
    if not np.all(np.isfinite(fx)):
        bad = int(np.flatnonzero(~np.isfinite(fx))[0])
        raise FloatingPointError(f"non-finite integrand at node {x[bad]}")
    hv = HermiteFunctionEvaluator(basis).values(x, idx)
    coeffs = s.c_l2 * ((fx * rule.free_weights) @ hv)
    return FockVector(coefficients=dict(zip(idx, coeffs)), truncation=top)


def transform_matrix(basis: HermiteBasis, max_degree: int) -> np.ndarray:
    """Matrix of ``C_k`` from ``(h_nu)`` to ``(phi_nu)``; the identity for an exact transform."""
    idx = basis.indices(max_degree)
    cols = []
    for mu in idx:
        fv = chaotic_transform(basis, {mu: 1.0}, max_degree=max_degree)
        cols.append(fv.array(idx))
    return np.array(cols).T


@dataclass
class CoherentState:
    """``F_z(x) = exp(-(l(z) + l(x))/2) E_k(sqrt(2) z, x)`` with h-coefficients ``phi_nu(z)``."""

    structure: DunklStructure
    z: np.ndarray
    fock: FockVector
    tail: float
    basis: HermiteBasis = field(repr=False)

    def pointwise(self, x):
        """Defining formula, through the closed product kernel."""
        x = np.asarray(x, dtype=float)
        if self.structure.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        z = self.z
        return np.exp(-(ell(z) + ell(x)) / 2) * dunkl_kernel_closed(self.structure, np.sqrt(2) * z, x)

    def from_coefficients(self, x):
        """``sum_nu phi_nu(z) h_nu(x)`` over the stored coefficients."""
        ev = HermiteFunctionEvaluator(self.basis)
        idx = list(self.fock.coefficients)
        return ev.values(x, idx) @ self.fock.array(idx)

    def norm_squared(self) -> float:
        return self.fock.norm() ** 2


def coherent_state(basis: HermiteBasis, z, w: complex = 1.0, max_degree: int | None = None) -> CoherentState:
    """``F_{wz}`` with coefficients ``phi_nu(z) w^|nu| = phi_nu(wz)``.

    The truncation tail ``E_k(wz, conj(wz)) - sum |phi_nu(wz)|^2`` is checked
    against ``COHERENT_TAIL_TOL`` (relative to the norm).
    """
    s = basis.structure
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (s.n,):
        raise ValueError(f"label must have shape ({s.n},)")
    top = basis.max_degree if max_degree is None else max_degree
    idx = basis.indices(top)
    pz = basis.phi_values(z, idx)
    w = complex(w)
    coeffs = pz * np.array([w ** sum(nu) for nu in idx])
    label = w * z
    total = dunkl_kernel_closed(s, label, np.conj(label)).real
    partial = float(np.sum(np.abs(coeffs) ** 2))
    tail = abs(total - partial) / max(1.0, total)
    if tail > COHERENT_TAIL_TOL:
        raise KernelDomainError(f"coherent state tail {tail:.1e} at |z| = {np.linalg.norm(label):.3g}")
    return CoherentState(structure=s, z=label, fock=FockVector(dict(zip(idx, coeffs)), top),
                         tail=tail, basis=basis)


def resolution_check(basis: HermiteBasis, f: dict, g: dict, max_degree: int | None = None):
    """``((C_k f, C_k g)_k, c_l2 int f conj(g) dw_k)`` for h-coefficient inputs."""
    s = basis.structure
    top = basis.max_degree if max_degree is None else max_degree
    deg = max(sum(nu) for nu in list(f) + list(g))
    top = max(min(top, basis.max_degree), deg)
    cf = chaotic_transform(basis, f, max_degree=top)
    cg = chaotic_transform(basis, g, max_degree=top)
    lhs = cf.inner(cg)
    ff = _resolve_function(basis, f)
    gg = _resolve_function(basis, g)
    rule = gauss_rule(s, max(s.quad_points, top + 2), beta=1.0)
    x = rule.nodes.real
    rhs = s.c_l2 * complex(rule.free_weights @ (ff(x) * np.conj(gg(x))))
    return lhs, rhs
