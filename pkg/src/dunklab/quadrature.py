r"""
Gaussian quadrature for the reflection-group weight on $\mathbb{R}^n$.

For the product group $\mathbb{Z}_2^n$ with roots $\sqrt{2} e_j$ the weight
factorizes,

$$
    w_k(x) = \prod_j |\sqrt{2}\, x_j|^{2\kappa_j},
$$

so every rule here is a tensor product of one-dimensional rules for

$$
    \int_{\mathbb{R}} f(t)\, 2^{\kappa} |t|^{2\kappa} e^{-\beta t^2} \, dt .
$$

The one-dimensional rules come from the three-term recurrence of the
generalized Hermite polynomials. The recurrence is generated from the exact
moments with the modified Chebyshev algorithm carried out in extended
precision (the moment map is badly conditioned in double precision). Nodes
follow from the Golub-Welsch eigenproblem; weights come from the Christoffel
function ``1 / sum_m p_m(t)^2`` instead of eigenvector components, which keeps
the tiny outer weights accurate to full relative precision.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from numpy.typing import NDArray
from scipy.linalg import eigh_tridiagonal


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights for integrals against ``w_k``.

    The rule integrates ``f * w_k * exp(-gaussian_scale * |x|^2)`` and is exact
    for polynomial ``f`` of total degree up to ``exact_degree``. Rules that are
    not polynomial-exact (``exact_degree == -1``) carry ``gaussian_scale = 0``.
    ``free_weights`` are ``weights * exp(gaussian_scale |x|^2)``, computed
    directly so they stay finite where the plain weights underflow.
    When ``half_line`` is set, nodes cover only ``x > 0`` with doubled weights
    and the rule is valid for even integrands only.
    """

    nodes: NDArray
    weights: NDArray
    gaussian_scale: float
    exact_degree: int
    half_line: bool = False
    kappa: tuple = field(default=())
    free_weights: NDArray | None = None

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def __len__(self) -> int:
        return len(self.weights)


def _moments(kappa: float, count: int, dps: int) -> list:
    # int |t|^{2k} t^j e^{-t^2} dt over the real line
    with mpmath.workdps(dps):
        out = []
        for j in range(count):
            if j % 2:
                out.append(mpmath.mpf(0))
            else:
                out.append(mpmath.gamma(mpmath.mpf(j + 1) / 2 + kappa))
        return out


@functools.lru_cache(maxsize=64)
def recurrence_coefficients(kappa: float, npts: int) -> tuple[NDArray, NDArray]:
    """Monic recurrence ``(alpha, beta)`` for the weight ``|t|^{2 kappa} e^{-t^2}``.

    Computed with Gautschi's Chebyshev algorithm from ordinary moments at
    ``npts + 40`` decimal digits; ``beta[0]`` is the total mass.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    dps = npts + 40
    mu = _moments(kappa, 2 * npts, dps)
    with mpmath.workdps(dps):
        alpha = [mpmath.mpf(0)] * npts
        beta = [mpmath.mpf(0)] * npts
        alpha[0] = mu[1] / mu[0]
        beta[0] = mu[0]
        sig_prev = [mpmath.mpf(0)] * (2 * npts)
        sig = list(mu)
        for k in range(1, npts):
            sig_new = [mpmath.mpf(0)] * (2 * npts)
            for ell in range(k, 2 * npts - k):
                sig_new[ell] = (sig[ell + 1] - alpha[k - 1] * sig[ell]
                                - beta[k - 1] * sig_prev[ell])
            alpha[k] = sig_new[k + 1] / sig_new[k] - sig[k] / sig[k - 1]
            beta[k] = sig_new[k] / sig[k - 1]
            sig_prev, sig = sig, sig_new
        a = np.array([float(v) for v in alpha])
        b = np.array([float(v) for v in beta])
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


@functools.lru_cache(maxsize=64)
def _unit_rule_1d(kappa: float, npts: int) -> tuple[NDArray, NDArray, NDArray]:
    # nodes, weights and weights * exp(t^2) for |t|^{2 kappa} e^{-t^2}
    alpha, beta = recurrence_coefficients(kappa, npts)
    # symmetric weight: alpha vanishes identically
    nodes = eigh_tridiagonal(np.zeros(npts), np.sqrt(beta[1:]), eigvals_only=True)
    nodes = 0.5 * (nodes - nodes[::-1])
    # Christoffel function with the Gaussian carried along: q_m = p_m exp(-t^2/2)
    rb = np.sqrt(beta)
    q_prev = np.zeros(npts)
    q = np.exp(-0.5 * nodes * nodes) / rb[0]
    total = q * q
    for m in range(1, npts):
        q_prev, q = q, (nodes * q - (rb[m - 1] if m > 1 else 0.0) * q_prev) / rb[m]
        total += q * q
    free = 1.0 / total
    free = 0.5 * (free + free[::-1])
    weights = free * np.exp(-nodes * nodes)
    for arr in (nodes, weights, free):
        arr.setflags(write=False)
    return nodes, weights, free


def _scaled_rule_1d(kappa: float, npts: int, beta: float):
    if npts < 1:
        raise ValueError("need at least one node")
    if beta <= 0:
        raise ValueError(f"gaussian scale must be positive, got {beta}")
    t, w, free = _unit_rule_1d(float(kappa), int(npts))
    scale = 1.0 / math.sqrt(beta)
    factor = (2.0 ** kappa) * scale ** (2 * kappa + 1)
    return t * scale, w * factor, free * factor


def gauss_rule_1d(kappa: float, npts: int, beta: float = 0.5) -> tuple[NDArray, NDArray]:
    r"""Nodes and weights for $\int f(t)\, 2^\kappa |t|^{2\kappa} e^{-\beta t^2} dt$."""
    t, w, _ = _scaled_rule_1d(kappa, npts, beta)
    return t, w


def gauss_rule(structure, npts: int | None = None, beta: float = 0.5) -> QuadratureRule:
    """Tensor-product Gaussian rule for ``w_k(x) exp(-beta |x|^2)`` on R^n.

    ``npts`` is the number of nodes per coordinate; the default follows the
    structure (80 for n = 1, 48 otherwise).
    """
    if npts is None:
        npts = structure.quad_points
    per_axis = [_scaled_rule_1d(k, npts, beta) for k in structure.kappa]
    grids = np.meshgrid(*(t for t, _, _ in per_axis), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = functools.reduce(np.multiply.outer, (w for _, w, _ in per_axis)).ravel()
    free = functools.reduce(np.multiply.outer, (f for _, _, f in per_axis)).ravel()
    return QuadratureRule(nodes=nodes, weights=weights, gaussian_scale=float(beta),
                          exact_degree=2 * npts - 1, kappa=tuple(structure.kappa), free_weights=free)


def rotated_gauss_rule(structure, delta: complex, npts: int | None = None) -> QuadratureRule:
    r"""Rule for $\int f(x) e^{-\delta \|x\|^2} dw_k(x)$ with complex $\delta$, $\mathrm{Re}\,\delta > 0$.

    Each coordinate is integrated along the ray $x = e^{i\phi} y$ with
    $\phi = -\arg(\delta)/2$, on which the Gaussian becomes the real
    $e^{-|\delta| y^2}$. On that ray $|x|^{2\kappa}$ continues analytically to
    $e^{2i\kappa\phi}|y|^{2\kappa}$, so the weights pick up the factor
    $e^{i\phi(2\kappa+1)}$ per coordinate. Valid for integrands $f$ that are
    entire of at most exponential growth; ``f`` is evaluated at complex nodes.
    """
    delta = complex(delta)
    if not delta.real > 0:
        raise ValueError(f"need Re(delta) > 0, got {delta}")
    if npts is None:
        npts = structure.quad_points
    phi = -cmath.phase(delta) / 2
    base = gauss_rule(structure, npts, beta=abs(delta))
    rot = cmath.exp(1j * phi)
    phase = cmath.exp(1j * phi * (2 * sum(structure.kappa) + structure.n))
    return QuadratureRule(nodes=base.nodes * rot, weights=base.weights * phase,
                          gaussian_scale=delta, exact_degree=base.exact_degree,
                          kappa=base.kappa, free_weights=base.free_weights * phase)


def log_radial_rule(kappa: float, lower: float, upper: float, step: float) -> QuadratureRule:
    r"""Trapezoid rule in $u = \log x$ for even integrands on the real line.

    Approximates $\int_{\mathbb{R}} f(x)\, 2^\kappa |x|^{2\kappa} dx$ for even
    $f$ by $2\sum_i h\, e^{u_i} w(e^{u_i}) f(e^{u_i})$ on the grid
    $u \in [\log \mathrm{lower}, \log \mathrm{upper}]$. The substitution turns
    features at widely separated scales into shifted bumps of unit width, and
    the trapezoid rule converges geometrically for the analytic integrands it
    is used on.
    """
    if not 0 < lower < upper:
        raise ValueError("need 0 < lower < upper")
    u = np.arange(math.log(lower), math.log(upper) + step, step)
    x = np.exp(u)
    w = 2.0 * step * x * (2.0 ** kappa) * x ** (2 * kappa)
    return QuadratureRule(nodes=x[:, None], weights=w, gaussian_scale=0.0,
                          exact_degree=-1, half_line=True, kappa=(float(kappa),))


def integrate_weighted(structure, f, rule: QuadratureRule) -> complex:
    """Apply ``rule`` to the residual integrand ``f`` (vectorized over nodes).

    ``f`` receives an ``(m, n)`` array of nodes and returns ``m`` values; any
    Gaussian factor not carried by the rule must already be folded into ``f``.
    """
    if rule.dim != structure.n:
        raise ValueError(f"rule is {rule.dim}-dimensional, structure has n={structure.n}")
    values = np.asarray(f(rule.nodes))
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise FloatingPointError(f"non-finite integrand {values[i]!r} at node {rule.nodes[i]}")
    total = np.dot(rule.weights, values)
    return complex(total)
