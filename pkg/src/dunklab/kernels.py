"""Dunkl kernel evaluation.

Two independent routes are provided:

* the series ``E_k(z, w) = sum_nu phi_nu(z) phi_nu(w)`` over the orthonormal
  basis, valid where the truncation bound is tiny;
* for the product group, the closed rank-one form

      E_kappa(u, v) = j_kappa(uv),
      j_kappa(w) = 0F1(; kappa + 1/2; w^2/4) + w/(2 kappa + 1) 0F1(; kappa + 3/2; w^2/4)

  evaluated through modified Bessel functions, multiplied over coordinates.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import special

from .core import DunklStructure, ball_volume
from .poly import HermiteBasis
from .quadrature import integrate_weighted, rotated_gauss_rule

SERIES_TOL = 1e-12


class KernelDomainError(ValueError):
    """Series truncation bound above tolerance."""


def _hyp0f1_series(b: float, w):
    z = w * w / 4
    term = np.ones_like(w)
    total = np.ones_like(w)
    for m in range(1, 30):
        term = term * z / (m * (b + m - 1))
        total = total + term
    return total


def _hyp0f1_bessel_scaled(b: float, w):
    # Gamma(b) (w/2)^(1-b) I_{b-1}(w) e^{-|Re w|}, principal branches, Re w >= 0
    return special.gamma(b) * (w / 2) ** (1 - b) * special.ive(b - 1, w)


def rank1_kernel(kappa: float, w, scaled: bool = False):
    """``j_kappa(w)``, the rank-one Dunkl kernel as a function of the product ``w = uv``.

    With ``scaled=True`` returns ``j_kappa(w) exp(-|Re w|)``, which stays finite
    for large arguments. On the negative real axis the two terms cancel and
    only absolute accuracy is available.
    """
    w = np.asarray(w, dtype=complex)
    b = kappa + 0.5
    flip = w.real < 0
    ww = np.where(flip, -w, w)
    small = np.abs(ww) < 1
    with np.errstate(all="ignore"):
        big1 = _hyp0f1_bessel_scaled(b, ww)
        big2 = _hyp0f1_bessel_scaled(b + 1, ww)
    damp = np.exp(-np.abs(ww.real))
    f1 = np.where(small, _hyp0f1_series(b, ww) * damp, big1)
    f2 = np.where(small, _hyp0f1_series(b + 1, ww) * damp, big2)
    out = f1 + w / (2 * kappa + 1) * f2
    if not scaled:
        out = out * np.exp(np.abs(w.real))
    return out


IVE_ASYMPTOTIC_FROM = 1e8


def _ive_real(nu: float, w):
    # exp(-w) I_nu(w) for real w > 0; AMOS gives up near 1e9, use the
    # Hankel expansion beyond IVE_ASYMPTOTIC_FROM (error ~ (nu^2/w)^4)
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    big = w >= IVE_ASYMPTOTIC_FROM
    out[~big] = special.ive(nu, w[~big])
    if big.any():
        wb = w[big]
        mu = 4 * nu * nu
        term = np.ones_like(wb)
        total = np.ones_like(wb)
        for k in range(1, 5):
            term = -term * (mu - (2 * k - 1) ** 2) / (k * 8 * wb)
            total += term
        out[big] = total / np.sqrt(2 * np.pi * wb)
    return out


def log_rank1_kernel_pos(kappa: float, w):
    """``log j_kappa(w) - w`` for real ``w >= 0`` (no overflow for huge ``w``)."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    small = w < 1
    if small.any():
        ws = w[small]
        b = kappa + 0.5
        val = _hyp0f1_series(b, ws) + ws / (2 * kappa + 1) * _hyp0f1_series(b + 1, ws)
        out[small] = np.log(val) - ws
    if (~small).any():
        wl = w[~small]
        # j = Gamma(k+1/2) (w/2)^(1/2-k) [I_{k-1/2}(w) + I_{k+1/2}(w)]
        out[~small] = (special.gammaln(kappa + 0.5) + (0.5 - kappa) * np.log(wl / 2)
                       + np.log(_ive_real(kappa - 0.5, wl) + _ive_real(kappa + 0.5, wl)))
    return out


def rank1_kernel_mp(kappa: float, w, dps: int = 50):
    """Extended-precision oracle: the rank-one series ``sum_m w^m / c_m``.

    ``c_m = prod_{i<=m} (i + 2 kappa [i odd])`` is the squared norm of ``x^m``
    under the pairing, so ``1/c_m`` are the squared basis coefficients.
    """
    with mpmath.workdps(dps):
        w = mpmath.mpc(w)
        k = mpmath.mpf(kappa)
        total = mpmath.mpf(1)
        term = mpmath.mpf(1)
        m = 0
        eps = mpmath.mpf(10) ** (-dps)
        while True:
            m += 1
            term = term * w / (m + (2 * k if m % 2 else 0))
            total += term
            if abs(term) < eps * abs(total) and m > abs(w):
                break
        return complex(total)


def dunkl_kernel_closed(s: DunklStructure, z, w, scaled: bool = False):
    """Product-group kernel ``prod_j j_{kappa_j}(z_j w_j)``, broadcasting over leading axes."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    prod = z * w
    if prod.shape[-1] != s.n:
        raise ValueError(f"arguments must have trailing dimension {s.n}")
    out = np.ones(prod.shape[:-1], dtype=complex)
    for j, k in enumerate(s.kappa):
        out = out * rank1_kernel(k, prod[..., j], scaled=scaled)
    return out


def ell(z):
    """Bilinear ``l(z) = <z, z> = sum z_j^2``."""
    z = np.asarray(z, dtype=complex)
    return np.sum(z * z, axis=-1)


def hnorm(z) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(z, dtype=complex)) ** 2)))


@dataclass
class KernelEvaluator:
    """Truncated series ``sum_{|nu| <= N} phi_nu(z) phi_nu(w)``.

    The attached bound ``(|z| |w|)^(N+1)/(N+1)!`` is the leading tail term; the
    full tail is at most ``exp(|z||w|)`` times it.
    """

    basis: HermiteBasis
    truncation_degree: int | None = None
    tol: float = SERIES_TOL
    _idx: list = field(init=False, repr=False)

    def __post_init__(self):
        if self.truncation_degree is None:
            self.truncation_degree = self.basis.max_degree
        self._idx = self.basis.indices(self.truncation_degree)

    @property
    def structure(self) -> DunklStructure:
        return self.basis.structure

    def bound(self, z, w) -> float:
        a = hnorm(z) * hnorm(w)
        m = self.truncation_degree + 1
        if a == 0:
            return 0.0
        return math.exp(m * math.log(a) - math.lgamma(m + 1))

    def max_product(self) -> float:
        """Largest ``|z||w|`` whose bound stays below ``tol``."""
        m = self.truncation_degree + 1
        return math.exp((math.log(self.tol) + math.lgamma(m + 1)) / m)

    def evaluate(self, z, w) -> tuple[complex, float]:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        b = self.bound(z, w)
        if b > self.tol:
            raise KernelDomainError(
                f"truncation bound {b:.2e} above {self.tol:.0e} at |z||w| = {hnorm(z) * hnorm(w):.3g}")
        pz = self.basis.phi_values(z, self._idx)
        pw = self.basis.phi_values(w, self._idx)
        return complex(np.sum(pz * pw)), b

    def __call__(self, z, w) -> complex:
        return self.evaluate(z, w)[0]


def kernel_value(ev: KernelEvaluator, z, w) -> complex:
    """Series when its bound allows, otherwise the closed product form."""
    try:
        return ev(z, w)
    except KernelDomainError:
        return complex(dunkl_kernel_closed(ev.structure, np.atleast_1d(z), np.atleast_1d(w)))


def gaussian_pairing(ev: KernelEvaluator, delta, z, w, npts: int | None = None):
    r"""Both sides of the complex Gaussian pairing

    $$\int e^{-\delta\|x\|^2} E_k(x,z) E_k(x,w)\, dw_k(x)
      = c_k^{-1} (2\delta)^{-(\gamma+n/2)} e^{(\ell(z)+\ell(w))/(4\delta)} E_k(z/(2\delta), w).$$

    The left side is computed by quadrature along the rotated contour, the
    right side by the kernel series (closed form as fallback). Powers use the
    principal branch.
    """
    s = ev.structure
    delta = complex(delta)
    if not delta.real > 0:
        raise ValueError(f"need Re(delta) > 0, got {delta}")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    rule = rotated_gauss_rule(s, delta, npts)
    lhs = integrate_weighted(
        s, lambda x: dunkl_kernel_closed(s, x, z) * dunkl_kernel_closed(s, x, w), rule)
    a = s.homogeneity
    rhs = (1.0 / s.c_k) * cmath.exp(-a * cmath.log(2 * delta)) \
        * cmath.exp((ell(z) + ell(w)) / (4 * delta)) * kernel_value(ev, z / (2 * delta), w)
    return lhs, complex(rhs)


@dataclass
class BoundsReport:
    constant: float
    constant_half: float
    saturated: bool
    values: np.ndarray
    samples: list

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["sample_id", "x", "y", "sandwiched_value"])
            for i, ((x, y), v) in enumerate(zip(self.samples, self.values)):
                wr.writerow([i, " ".join(f"{t:.17g}" for t in np.atleast_1d(x)),
                             " ".join(f"{t:.17g}" for t in np.atleast_1d(y)), f"{v:.17g}"])


def sandwiched_value(s: DunklStructure, x, y) -> float:
    """``E_k(x,y) w_k(B(x,1)) exp(-(|x|^2+|y|^2)/2)`` for real ``x, y``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    scaled = dunkl_kernel_closed(s, x, y, scaled=True).real
    expo = np.sum(np.abs(x * y)) - 0.5 * (x @ x + y @ y)
    return float(scaled * math.exp(expo) * ball_volume(s, x, 1.0))


def band_samples(rng, n: int, count: int, eps0: float, radius: float = 6.0) -> list:
    """Random pairs ``(x, y)`` with ``|x - y| < eps0`` and ``|x_j| <= radius``."""
    out = []
    for _ in range(count):
        x = rng.uniform(-radius, radius, size=n)
        d = rng.normal(size=n)
        d *= rng.uniform(0, eps0) / np.linalg.norm(d)
        out.append((x, x + d))
    return out


def kernel_bounds_check(ev: KernelEvaluator, samples) -> BoundsReport:
    """Fit the smallest ``C >= 1`` sandwiching the near-diagonal kernel.

    ``saturated`` is False when the constant keeps growing between the first
    half of the samples and the full set by more than 10 percent.
    """
    s = ev.structure
    samples = list(samples)
    vals = np.array([sandwiched_value(s, x, y) for x, y in samples])
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise FloatingPointError("non-positive or non-finite sandwiched value")

    def fit(v):
        return float(max(1.0, v.max(), 1.0 / v.min()))

    c_full = fit(vals)
    c_half = fit(vals[: max(1, len(vals) // 2)])
    return BoundsReport(constant=c_full, constant_half=c_half,
                        saturated=c_full <= 1.1 * c_half, values=vals, samples=samples)

