"""Reflection-group data for the product group Z_2^n and its weighted measure."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import integrate

from .quadrature import gauss_rule, integrate_weighted

DEFAULT_QUAD_POINTS = {1: 80}
FALLBACK_QUAD_POINTS = 48


class ConfigError(ValueError):
    """Invalid structure or run configuration."""


@dataclass(frozen=True)
class DunklStructure:
    """Root system ``{sqrt(2) e_j}`` with multiplicities ``kappa``.

    ``c_k`` is the normalization ``1 / int exp(-|x|^2/2) dw_k``. ``c_l2`` is the
    constant that makes the generalized Hermite functions orthonormal,
    ``1 / int exp(-|x|^2) dw_k = 2^(gamma + n/2) c_k``; all L^p_k norms in this
    package use ``c_l2 * dw_k``.
    """

    n: int
    kappa: tuple[float, ...]
    positive_roots: tuple[tuple[float, ...], ...]
    gamma: float
    c_k: float
    quad_points: int

    @property
    def c_l2(self) -> float:
        return 2.0 ** (self.gamma + self.n / 2) * self.c_k

    @property
    def homogeneity(self) -> float:
        """``gamma + n/2``, the exponent that recurs in every closed form."""
        return self.gamma + self.n / 2

    @property
    def multiplicities(self) -> dict[tuple[float, ...], float]:
        return dict(zip(self.positive_roots, self.kappa))

    @property
    def is_trivial(self) -> bool:
        return all(k == 0 for k in self.kappa)

    def reflect(self, root_index: int, x):
        """Apply the reflection ``r_alpha`` for the ``root_index``-th positive root."""
        alpha = np.asarray(self.positive_roots[root_index])
        x = np.asarray(x, dtype=float)
        return x - 2 * (x @ alpha)[..., None] * alpha / (alpha @ alpha)


def build_structure(n: int, kappa, quad_points: int | None = None) -> DunklStructure:
    """Build the Z_2^n structure with multiplicity ``kappa[j]`` on ``sqrt(2) e_j``."""
    if int(n) != n or n < 1:
        raise ConfigError(f"dimension must be a positive integer, got {n!r}")
    n = int(n)
    kappa = tuple(float(k) for k in np.atleast_1d(kappa))
    if len(kappa) != n:
        raise ConfigError(f"expected {n} multiplicities, got {len(kappa)}")
    if any(not math.isfinite(k) or k < 0 for k in kappa):
        raise ConfigError(f"multiplicities must be finite and nonnegative, got {kappa}")
    if quad_points is None:
        quad_points = DEFAULT_QUAD_POINTS.get(n, FALLBACK_QUAD_POINTS)
    roots = tuple(tuple(math.sqrt(2.0) if i == j else 0.0 for i in range(n)) for j in range(n))
    partial = DunklStructure(n=n, kappa=kappa, positive_roots=roots, gamma=math.fsum(kappa),
                             c_k=float("nan"), quad_points=int(quad_points))
    # constant integrand: a few nodes per axis are already exact
    rule = gauss_rule(partial, npts=8, beta=0.5)
    mass = integrate_weighted(partial, lambda x: np.ones(len(x)), rule).real
    return DunklStructure(n=n, kappa=kappa, positive_roots=roots, gamma=partial.gamma,
                          c_k=1.0 / mass, quad_points=int(quad_points))


def load_structure(source) -> DunklStructure:
    """Read ``{"n": int, "kappa": [...], "quad_points": int}`` from a path or mapping."""
    if isinstance(source, (str, Path)):
        try:
            data = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read structure config {source}: {exc}") from exc
    else:
        data = dict(source)
    if "n" not in data or "kappa" not in data:
        raise ConfigError("structure config needs 'n' and 'kappa'")
    return build_structure(data["n"], data["kappa"], data.get("quad_points"))


def weight_at(s: DunklStructure, x):
    """``prod_alpha |<alpha, x>|^{2 kappa_alpha}``, vectorized over leading axes."""
    x = np.asarray(x, dtype=float)
    out = np.ones(x.shape[:-1])
    for alpha, k in zip(s.positive_roots, s.kappa):
        if k:
            out = out * np.abs(x @ np.asarray(alpha)) ** (2 * k)
    return out


def _interval_mass(k: float, a: float, b: float) -> float:
    # int_a^b 2^k |t|^{2k} dt in closed form
    def prim(t):
        return math.copysign(abs(t) ** (2 * k + 1), t) / (2 * k + 1)
    return 2.0 ** k * (prim(b) - prim(a))


def _ball_mass(kappa, center, radius) -> float:
    k0 = kappa[0]
    c0 = center[0]
    if len(kappa) == 1:
        return _interval_mass(k0, c0 - radius, c0 + radius)

    def slice_mass(t):
        h = radius * radius - (t - c0) ** 2
        if h <= 0:
            return 0.0
        inner = _ball_mass(kappa[1:], center[1:], math.sqrt(h))
        return 2.0 ** k0 * abs(t) ** (2 * k0) * inner

    lo, hi = c0 - radius, c0 + radius
    points = [0.0] if lo < 0 < hi else None
    val, _ = integrate.quad(slice_mass, lo, hi, points=points, epsabs=0.0,
                            epsrel=1e-12, limit=200)
    return val


def ball_volume(s: DunklStructure, center, radius: float) -> float:
    """``w_k(B(center, radius))``.

    The last coordinate is integrated in closed form; the remaining ones are
    sliced and integrated adaptively, with a breakpoint where the slice crosses
    a reflecting hyperplane.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.shape != (s.n,):
        raise ValueError(f"center must have shape ({s.n},)")
    return _ball_mass(s.kappa, tuple(center), float(radius))


def comparison_constant(s: DunklStructure, samples) -> float:
    """Smallest ``C`` with ``C^-1 w <= r^n prod(|<alpha,x>| + r)^{2k} <= C w`` on ``samples``.

    ``samples`` is an iterable of ``(x, r)`` pairs.
    """
    worst = 1.0
    for x, r in samples:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        model = r ** s.n
        for alpha, k in zip(s.positive_roots, s.kappa):
            model *= (abs(float(np.dot(alpha, x))) + r) ** (2 * k)
        ratio = model / ball_volume(s, x, r)
        worst = max(worst, ratio, 1.0 / ratio)
    return worst
