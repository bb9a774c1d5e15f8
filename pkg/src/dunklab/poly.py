"""Exact multivariate polynomials carrying the Dunkl operators and the Fischer-type pairing.

Coefficients are double-precision complex numbers; "exact" means every
operation is carried out term by term with no truncation or discretization.
The difference quotient in the Dunkl operator is performed as a genuine
polynomial division and its remainder is checked.
"""

from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, Mapping

import numpy as np

from .core import DunklStructure

# max total degree of a basis per dimension
DEGREE_CUTOFFS = {1: 100, 2: 64, 3: 24}
ORTHO_TOL = 1e-8


class DivisionError(ArithmeticError):
    """Difference quotient left a remainder; signals a root/reflection bug."""


class BasisError(ArithmeticError):
    pass


class Polynomial:
    """Immutable polynomial in ``n`` variables, ``{exponent tuple: complex}``.

    Zero coefficients are never stored, so the zero polynomial has no terms
    and two polynomials compare equal iff their coefficient maps do.
    """

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping[tuple, complex] | None = None):
        self.n = int(n)
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n or min(exps, default=0) < 0:
                raise ValueError(f"bad exponent {exps} for n={self.n}")
            c = complex(c)
            if c != 0:
                clean[exps] = clean.get(exps, 0) + c
                if clean[exps] == 0:
                    del clean[exps]
        self._terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def _raw(cls, n: int, terms: dict) -> "Polynomial":
        # trusted constructor: canonical int-tuple keys, complex nonzero values
        obj = cls.__new__(cls)
        obj.n = n
        obj._terms = {e: complex(c) for e, c in terms.items()}
        obj._hash = None
        return obj

    @classmethod
    def monomial(cls, exps, coeff=1.0) -> "Polynomial":
        exps = tuple(exps)
        return cls(len(exps), {exps: coeff})

    @classmethod
    def constant(cls, n: int, c=1.0) -> "Polynomial":
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, n: int, j: int) -> "Polynomial":
        e = [0] * n
        e[j] = 1
        return cls(n, {tuple(e): 1.0})

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, exps) -> complex:
        return self._terms.get(tuple(exps), 0j)

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def is_homogeneous(self, degree: int | None = None) -> bool:
        degs = {sum(e) for e in self._terms}
        if not degs:
            return True
        if len(degs) > 1:
            return False
        return degree is None or degs == {degree}

    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self._terms.values())

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        if not self._terms:
            return f"Polynomial(n={self.n}, 0)"
        body = " + ".join(f"({c:.6g})*x^{e}" for e, c in sorted(self._terms.items()))
        return f"Polynomial(n={self.n}, {body})"

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.n == other.n and self._terms == other._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._terms.items())))
        return self._hash

    def _check(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.n, other)
        if other.n != self.n:
            raise ValueError(f"dimension mismatch {self.n} vs {other.n}")
        return other

    def __add__(self, other):
        other = self._check(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial._raw(self.n, {e: c for e, c in out.items() if c != 0})

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            other = self._check(other)
            out: dict = {}
            for e1, c1 in self._terms.items():
                for e2, c2 in other._terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    out[e] = out.get(e, 0) + c1 * c2
            return Polynomial(self.n, out)
        c = complex(other)
        return Polynomial._raw(self.n, {e: c * v for e, v in self._terms.items() if c * v != 0})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / complex(scalar))

    def conj(self) -> "Polynomial":
        return Polynomial(self.n, {e: c.conjugate() for e, c in self._terms.items()})

    def homogeneous_part(self, degree: int) -> "Polynomial":
        return Polynomial(self.n, {e: c for e, c in self._terms.items() if sum(e) == degree})

    def compose_diag(self, scale) -> "Polynomial":
        """``p(s_1 x_1, ..., s_n x_n)`` for a diagonal linear map."""
        scale = np.broadcast_to(np.asarray(scale, dtype=complex), (self.n,))
        out = {}
        for e, c in self._terms.items():
            f = c
            for s, k in zip(scale, e):
                f *= s ** k
            out[e] = f
        return Polynomial(self.n, out)

    def multiply_by_variable(self, j: int) -> "Polynomial":
        out = {}
        for e, c in self._terms.items():
            e2 = list(e)
            e2[j] += 1
            out[tuple(e2)] = c
        return Polynomial(self.n, out)

    def divide_by_variable(self, j: int) -> "Polynomial":
        """Exact division by ``x_j``; raises :class:`DivisionError` on a remainder."""
        out = {}
        for e, c in self._terms.items():
            if e[j] == 0:
                raise DivisionError(f"term x^{e} not divisible by x_{j + 1}")
            e2 = list(e)
            e2[j] -= 1
            out[tuple(e2)] = c
        return Polynomial(self.n, out)

    def derivative(self, j: int) -> "Polynomial":
        out = {}
        for e, c in self._terms.items():
            if e[j]:
                e2 = list(e)
                e2[j] -= 1
                out[tuple(e2)] = c * e[j]
        return Polynomial(self.n, out)

    def _arrays(self):
        if not self._terms:
            return np.zeros((0, self.n), dtype=int), np.zeros(0, dtype=complex)
        exps = np.array(list(self._terms.keys()), dtype=int).reshape(-1, self.n)
        coeffs = np.array(list(self._terms.values()), dtype=complex)
        return exps, coeffs

    def __call__(self, x):
        """Evaluate at points ``x`` of shape ``(..., n)`` (real or complex)."""
        return evaluate_many([self], x)[..., 0]


def evaluate_many(polys, x):
    """Evaluate a list of polynomials at points ``x``; returns shape ``(..., len(polys))``."""
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[-1] != polys[0].n:
        # n = 1 accepts bare scalars/1-D arrays of points
        if polys[0].n == 1:
            x = x[..., None]
        else:
            raise ValueError(f"points must have trailing dimension {polys[0].n}")
    lead = x.shape[:-1]
    pts = x.reshape(-1, x.shape[-1]).astype(complex)
    n = pts.shape[1]
    deg = max(p.degree for p in polys)
    out = np.zeros((pts.shape[0], len(polys)), dtype=complex)
    if deg < 0:
        return out.reshape(lead + (len(polys),))
    powers = np.ones((n, pts.shape[0], deg + 1), dtype=complex)
    for m in range(1, deg + 1):
        powers[:, :, m] = powers[:, :, m - 1] * pts.T
    for i, p in enumerate(polys):
        exps, coeffs = p._arrays()
        if not len(coeffs):
            continue
        prod = np.ones((pts.shape[0], len(coeffs)), dtype=complex)
        for j in range(n):
            prod *= powers[j][:, exps[:, j]]
        out[:, i] = prod @ coeffs
    return out.reshape(lead + (len(polys),))


def _reflection_axis(s: DunklStructure, root_index: int) -> int:
    alpha = np.asarray(s.positive_roots[root_index])
    axis = np.flatnonzero(alpha)
    if len(axis) != 1:
        raise NotImplementedError("only coordinate roots are supported")
    return int(axis[0])


def _reflect(s: DunklStructure, root_index: int, p: Polynomial) -> Polynomial:
    """``p o r_alpha``; for coordinate roots the reflection flips one sign."""
    axis = _reflection_axis(s, root_index)
    return Polynomial._raw(p.n, {e: (-c if e[axis] % 2 else c) for e, c in p.items()})


def dunkl_apply(s: DunklStructure, j: int, p: Polynomial) -> Polynomial:
    """``T_j p = d_j p + sum_alpha kappa_alpha alpha_j (p - p o r_alpha) / <alpha, x>``.

    ``j`` is zero-based. The difference quotient is an exact division by the
    linear form ``<alpha, x>``, done term by term with a remainder check.
    """
    if not 0 <= j < s.n:
        raise IndexError(f"coordinate {j} out of range for n={s.n}")
    if p.n != s.n:
        raise ValueError("polynomial dimension does not match structure")
    out: dict = {}
    for e, c in p.items():
        if e[j]:
            e2 = e[:j] + (e[j] - 1,) + e[j + 1:]
            out[e2] = out.get(e2, 0) + c * e[j]
    for idx, (alpha, k) in enumerate(zip(s.positive_roots, s.kappa)):
        if k == 0 or alpha[j] == 0:
            continue
        axis = _reflection_axis(s, idx)
        a = alpha[axis]
        for e, c in p.items():
            # (p - p o r) keeps exactly the terms odd in x_axis, doubled
            if e[axis] % 2 == 0:
                continue
            if e[axis] == 0:
                raise DivisionError(f"term x^{e} not divisible by x_{axis + 1}")
            e2 = e[:axis] + (e[axis] - 1,) + e[axis + 1:]
            out[e2] = out.get(e2, 0) + 2 * c / a * (k * alpha[j])
    return Polynomial._raw(s.n, {e: c for e, c in out.items() if c != 0})


def dunkl_laplacian(s: DunklStructure, p: Polynomial) -> Polynomial:
    out = Polynomial.zero(s.n)
    for j in range(s.n):
        out = out + dunkl_apply(s, j, dunkl_apply(s, j, p))
    return out


def dunkl_laplacian_explicit(s: DunklStructure, p: Polynomial) -> Polynomial:
    """Closed expression ``Delta p + sum_alpha k_alpha (2<grad p, alpha>/<alpha,x> - |alpha|^2 (p - p o r)/<alpha,x>^2)``."""
    out = Polynomial.zero(s.n)
    for j in range(s.n):
        out = out + p.derivative(j).derivative(j)
    for idx, (alpha, k) in enumerate(zip(s.positive_roots, s.kappa)):
        if k == 0:
            continue
        axis = int(np.flatnonzero(np.asarray(alpha))[0])
        # <grad p, alpha>/<alpha,x> = d p / x_axis and |alpha|^2/<alpha,x>^2 = 1/x_axis^2;
        # the two pieces are only divisible together
        diff = p - _reflect(s, idx, p)
        numer = p.derivative(axis).multiply_by_variable(axis) * 2 - diff
        out = out + numer.divide_by_variable(axis).divide_by_variable(axis) * k
    return out


@functools.lru_cache(maxsize=200_000)
def _monomial_pairing(kappa: tuple, roots: tuple, a: tuple, b: tuple) -> float:
    # (T^a x^b)(0); zero unless a == b after full application
    if sum(a) != sum(b):
        return 0.0
    s = _pairing_structure(kappa, roots)
    q = Polynomial.monomial(b)
    for j, aj in enumerate(a):
        for _ in range(aj):
            q = dunkl_apply(s, j, q)
            if q.is_zero():
                return 0.0
    return q.coefficient((0,) * len(a)).real


@functools.lru_cache(maxsize=64)
def _pairing_structure(kappa, roots):
    return DunklStructure(n=len(kappa), kappa=kappa, positive_roots=roots,
                          gamma=math.fsum(kappa), c_k=float("nan"), quad_points=0)


def dunkl_pairing(s: DunklStructure, p: Polynomial, q: Polynomial) -> complex:
    """``[p, q]_k = (p(T) q)(0)``, bilinear in both slots."""
    total = 0j
    for a, ca in p.items():
        for b, cb in q.items():
            if sum(a) != sum(b):
                continue
            v = _monomial_pairing(s.kappa, s.positive_roots, a, b)
            if v:
                total += ca * cb * v
    return total


def graded_lex(n: int, degree: int) -> list[tuple]:
    """Exponents of total degree ``degree`` in descending lexicographic order."""
    out = []
    for combo in combinations_with_replacement(range(n), degree):
        e = [0] * n
        for j in combo:
            e[j] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


@dataclass
class HermiteBasis:
    """Orthonormal ``phi_nu`` and generalized Hermite polynomials ``H_nu`` up to ``max_degree``."""

    structure: DunklStructure
    max_degree: int
    phi: dict = field(default_factory=dict)
    hermite: dict = field(default_factory=dict)

    def indices(self, max_degree: int | None = None) -> list[tuple]:
        top = self.max_degree if max_degree is None else max_degree
        if top > self.max_degree:
            raise ValueError(f"degree {top} beyond basis cutoff {self.max_degree}")
        return [nu for d in range(top + 1) for nu in graded_lex(self.structure.n, d)]

    def check_index(self, nu) -> tuple:
        nu = tuple(int(v) for v in np.atleast_1d(nu))
        if len(nu) != self.structure.n or min(nu) < 0:
            raise ValueError(f"bad multi-index {nu}")
        if sum(nu) > self.max_degree:
            raise ValueError(f"|nu| = {sum(nu)} beyond basis cutoff {self.max_degree}")
        return nu

    def phi_values(self, z, indices=None):
        idx = self.indices() if indices is None else indices
        return evaluate_many([self.phi[nu] for nu in idx], z)

    def hermite_values(self, x, indices=None):
        idx = self.indices() if indices is None else indices
        return evaluate_many([self.hermite[nu] for nu in idx], x)

    def gram(self) -> np.ndarray:
        idx = self.indices()
        g = np.zeros((len(idx), len(idx)), dtype=complex)
        for i, a in enumerate(idx):
            for j, b in enumerate(idx):
                if sum(a) == sum(b):
                    g[i, j] = dunkl_pairing(self.structure, self.phi[a], self.phi[b])
        return g


def _gram_schmidt(s: DunklStructure, monos: list[tuple], degree: int) -> dict:
    basis: list[Polynomial] = []
    for e in monos:
        v = Polynomial.monomial(e)
        # two passes of modified Gram-Schmidt
        for _ in range(2):
            for u in basis:
                v = v - u * dunkl_pairing(s, u, v)
        nrm2 = dunkl_pairing(s, v, v).real
        if not nrm2 > 0:
            raise BasisError(f"degenerate pairing in degree {degree} at x^{e}")
        v = v / math.sqrt(nrm2)
        # imaginary round-off never arises from real inputs; keep coefficients real
        v = Polynomial(s.n, {k: c.real for k, c in v.items()})
        basis.append(v)
    worst = 0.0
    for i, u in enumerate(basis):
        for j in range(i, len(basis)):
            target = 1.0 if i == j else 0.0
            worst = max(worst, abs(dunkl_pairing(s, u, basis[j]) - target))
    if worst > ORTHO_TOL:
        raise BasisError(f"loss of orthogonality {worst:.2e} in degree {degree}")
    return dict(zip(monos, basis))


def hermite_from_phi(s: DunklStructure, phi: Polynomial, degree: int) -> Polynomial:
    """``H = 2^m sum_l (-1)^l / (4^l l!) Delta_k^l phi`` with ``m = |nu|``."""
    out = Polynomial.zero(s.n)
    term = phi
    for ell in range(degree // 2 + 1):
        out = out + term * ((-1) ** ell / (4.0 ** ell * math.factorial(ell)))
        term = dunkl_laplacian(s, term)
    return out * (2.0 ** degree)


@functools.lru_cache(maxsize=32)
def _cached_basis(s: DunklStructure, max_degree: int) -> HermiteBasis:
    hb = HermiteBasis(structure=s, max_degree=max_degree)
    for d in range(max_degree + 1):
        block = _gram_schmidt(s, graded_lex(s.n, d), d)
        hb.phi.update(block)
        for nu, p in block.items():
            hb.hermite[nu] = hermite_from_phi(s, p, d)
    return hb


def orthonormal_basis(s: DunklStructure, max_degree: int) -> HermiteBasis:
    """Gram-Schmidt on graded-lex monomials of each homogeneous degree, plus ``H_nu``.

    Results are cached per ``(structure, max_degree)``; treat them as read-only.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be nonnegative")
    cutoff = DEGREE_CUTOFFS.get(s.n, 16)
    if max_degree > cutoff:
        raise ValueError(f"max_degree {max_degree} exceeds the cutoff {cutoff} for n={s.n}")
    return _cached_basis(s, int(max_degree))


def monic_hermite(hb: HermiteBasis, nu) -> Polynomial:
    """``H_nu`` rescaled so its ``x^nu`` coefficient is ``2^|nu|`` (classical at kappa = 0)."""
    nu = hb.check_index(nu)
    lead = hb.phi[nu].coefficient(nu).real
    return hb.hermite[nu] / lead


def basis_csv(hb: HermiteBasis, max_degree: int | None = None) -> str:
    """Deterministic CSV table of ``phi``, ``H`` and monic ``H`` coefficients."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "nu", "exponents", "coefficient"])
    for nu in hb.indices(max_degree):
        tables = (("phi", hb.phi[nu]), ("hermite", hb.hermite[nu]),
                  ("hermite_monic", monic_hermite(hb, nu)))
        for kind, p in tables:
            for e in sorted(p.terms, reverse=True):
                c = p.coefficient(e)
                w.writerow([kind, " ".join(map(str, nu)), " ".join(map(str, e)),
                            f"{c.real:.17g}"])
    return buf.getvalue()


def random_polynomial(rng, n: int, degree: int, nterms: int = 6, complex_coeffs=False) -> Polynomial:
    terms = {}
    for _ in range(nterms):
        d = int(rng.integers(0, degree + 1))
        e = [0] * n
        for j in rng.integers(0, n, size=d):
            e[j] += 1
        c = rng.normal()
        if complex_coeffs:
            c = c + 1j * rng.normal()
        terms[tuple(e)] = terms.get(tuple(e), 0) + c
    return Polynomial(n, terms)


def from_terms(n: int, items: Iterable[tuple[tuple, complex]]) -> Polynomial:
    return Polynomial(n, dict(items))
