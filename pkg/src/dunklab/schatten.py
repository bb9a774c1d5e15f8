"""Trial operators ``gamma_eps``, their densities, Schatten and mixed norms, and the blow-up scan.

``gamma_eps = sum_nu eps^(2|nu|) |h_nu><h_nu|`` is diagonal in the Hermite
basis. Its density is given by the Mehler formula at ``r = eps^2, x = y``,

    rho(x) = (1-eps^4)^-(gamma+n/2) exp(-(1+eps^4)/(1-eps^4) |x|^2) E_k(2 eps^2 x/(1-eps^4), x),

and for the product group it factorizes over coordinates. All ``L^p_k`` norms
use the measure ``c_l2 dw_k`` under which the ``h_nu`` are orthonormal.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import special, stats

from .core import ConfigError, DunklStructure, build_structure
from .kernels import log_rank1_kernel_pos
from .poly import HermiteBasis
from .quadrature import log_radial_rule

TAIL_TOL = 1e-13
DEFAULT_EPS2_GRID = (0.90, 0.93, 0.96, 0.98, 0.99, 0.995, 0.999)
QUAD_ERROR_TOL = 1e-6


def multiplicity(n: int, ell) -> np.ndarray:
    """``binom(l + n - 1, n - 1)``, the dimension of the degree-``l`` eigenspace."""
    return special.comb(np.asarray(ell) + n - 1, n - 1, exact=False)


def _log_multiplicity(n: int, ell):
    ell = np.asarray(ell, dtype=float)
    return special.gammaln(ell + n) - special.gammaln(ell + 1) - special.gammaln(n)


def _truncation_degree(n: int, q: float, tol: float = TAIL_TOL) -> int:
    # smallest L with tail sum_{l>L} binom(l+n-1,n-1) q^l below tol * (1-q)^-n
    log_total = -n * math.log1p(-q)
    ell = 0
    while True:
        step = max(64, ell)
        grid = np.arange(ell, ell + step)
        nxt = grid + 1
        log_term = _log_multiplicity(n, nxt) + nxt * math.log(q)
        ratio = q * (nxt + n) / (nxt + 1)
        with np.errstate(divide="ignore"):
            log_bound = np.where(ratio < 1, log_term - np.log1p(-np.minimum(ratio, 1 - 1e-300)), np.inf)
        ok = np.flatnonzero(log_bound < math.log(tol) + log_total)
        if len(ok):
            return int(grid[ok[0]])
        ell += step


@dataclass(frozen=True)
class GammaEpsOperator:
    """Spectral data ``eps^(2l)`` with multiplicity ``binom(l+n-1, n-1)``, ``l <= L``.

    ``scale`` multiplies the whole operator (used for homogeneity checks).
    """

    structure: DunklStructure
    eps: float
    L: int
    scale: float = 1.0

    @property
    def eps2(self) -> float:
        return self.eps ** 2

    def log_eigen_terms(self, r: float = 1.0):
        ell = np.arange(self.L + 1)
        return _log_multiplicity(self.structure.n, ell) + r * (ell * math.log(self.eps2) + math.log(self.scale))

    def eigenvalues(self):
        """``(levels, values, multiplicities)`` up to degree ``L``."""
        ell = np.arange(self.L + 1)
        return ell, self.scale * self.eps2 ** ell, multiplicity(self.structure.n, ell)

    def trace(self) -> float:
        return float(np.sum(np.exp(self.log_eigen_terms(1.0))))

    def trace_closed(self) -> float:
        return self.scale * (1 - self.eps2) ** (-self.structure.n)

    def operator_norm(self) -> float:
        return self.scale


def gamma_eps(s: DunklStructure, eps: float, L: int | None = None, scale: float = 1.0) -> GammaEpsOperator:
    """Trial operator; ``L`` defaults to the smallest degree with relative tail below ``TAIL_TOL``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if L is None:
        L = _truncation_degree(s.n, eps * eps)
    return GammaEpsOperator(structure=s, eps=float(eps), L=int(L), scale=float(scale))


def schatten_norm(G: GammaEpsOperator, r: float) -> float:
    """Truncated ``(sum_l binom(l+n-1,n-1) (scale eps^(2l))^r)^(1/r)``."""
    if r < 1:
        raise ValueError(f"Schatten exponent must be >= 1, got {r}")
    terms = np.exp(G.log_eigen_terms(r))
    return float(math.fsum(terms) ** (1.0 / r))


def schatten_norm_closed(G: GammaEpsOperator, r: float) -> float:
    return G.scale * (1 - G.eps2 ** r) ** (-G.structure.n / r)


# density

def log_density_factor(kappa: float, eps2: float, x):
    """Log of one coordinate factor of the closed density."""
    x = np.asarray(x, dtype=float)
    e4 = eps2 * eps2
    sigma = 1 - eps2
    w = 2 * eps2 * x * x / (1 - e4)
    return -(kappa + 0.5) * math.log1p(-e4) - x * x * sigma / (1 + eps2) + log_rank1_kernel_pos(kappa, w)


def density_closed(G: GammaEpsOperator, x):
    """Closed Mehler form of the density (independent of time), shape ``(...,)``."""
    s = G.structure
    x = np.asarray(x, dtype=float)
    if s.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    total = np.zeros(x.shape[:-1])
    for j, k in enumerate(s.kappa):
        total = total + log_density_factor(k, G.eps2, x[..., j])
    return G.scale * np.exp(total)


def _hermite_table(G: GammaEpsOperator, basis: HermiteBasis, x):
    from .hermite import HermiteFunctionEvaluator
    if G.L > basis.max_degree:
        raise ValueError(f"truncation degree {G.L} exceeds basis cutoff {basis.max_degree}; use a smaller eps")
    idx = basis.indices(G.L)
    hv = HermiteFunctionEvaluator(basis).values(x, idx)
    weights = G.scale * np.array([G.eps2 ** sum(nu) for nu in idx])
    return idx, hv, weights


def density_spectral(G: GammaEpsOperator, basis: HermiteBasis, x):
    """``sum_{|nu| <= L} eps^(2|nu|) h_nu(x)^2``."""
    _, hv, weights = _hermite_table(G, basis, x)
    return (hv * hv) @ weights


def density_propagated(G: GammaEpsOperator, basis: HermiteBasis, x, t: float):
    """``sum eps^(2|nu|) |exp(-it mu_nu) h_nu(x)|^2`` with the phases applied explicitly."""
    idx, hv, weights = _hermite_table(G, basis, x)
    mu = np.array([sum(nu) + G.structure.homogeneity for nu in idx])
    amp = hv * np.exp(-1j * t * mu)
    return (np.abs(amp) ** 2) @ weights


def density_eval(G: GammaEpsOperator, x, t: float = 0.0, basis: HermiteBasis | None = None,
                 method: str = "closed"):
    """Density at ``x``; ``method`` is ``closed``, ``spectral`` or ``propagated``."""
    if method == "closed":
        return density_closed(G, x)
    if basis is None:
        raise ValueError(f"method {method!r} needs a basis")
    if method == "spectral":
        return density_spectral(G, basis, x)
    if method == "propagated":
        return density_propagated(G, basis, x, t)
    raise ValueError(f"unknown method {method!r}")


# norms

def _factor_integral(kappa: float, eps2: float, p: float, step: float) -> float:
    # c_l2 int rho_j^p dw_kappa along one axis, log-variable trapezoid
    sigma = 1 - eps2
    upper = math.sqrt(800 * (1 + eps2) / (p * sigma))
    rule = log_radial_rule(kappa, math.exp(-40), upper, step)
    x = rule.nodes[:, 0]
    vals = np.exp(p * log_density_factor(kappa, eps2, x))
    c_l2 = 2.0 ** (kappa + 0.5) / (2.0 ** (2 * kappa + 0.5) * math.gamma(kappa + 0.5))
    return c_l2 * float(rule.weights @ vals)


def lp_integral(G: GammaEpsOperator, p: float, step: float = 0.05) -> tuple[float, float]:
    """``(c_l2 int rho^p dw_k, relative error estimate)``; error from the rule with twice the step."""
    s = G.structure
    fine = 1.0
    coarse = 1.0
    for k in s.kappa:
        fine *= _factor_integral(k, G.eps2, p, step)
        coarse *= _factor_integral(k, G.eps2, p, 2 * step)
    fine *= G.scale ** p
    coarse *= G.scale ** p
    return fine, abs(fine - coarse) / abs(fine)


def trace_integral(G: GammaEpsOperator, normalization: str = "l2") -> float:
    """``c int rho dw_k`` with ``c = c_l2`` (default) or the literal ``c_k``."""
    val, _ = lp_integral(G, 1.0)
    if normalization == "l2":
        return val
    if normalization == "c_k":
        return val * G.structure.c_k / G.structure.c_l2
    raise ValueError(normalization)


def density_lp_norm(G: GammaEpsOperator, p: float, step: float = 0.05) -> tuple[float, float]:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    val, err = lp_integral(G, p, step)
    return val ** (1.0 / p), err / p


def mixed_norm(G: GammaEpsOperator, p: float, q: float, step: float = 0.05, strict: bool = True):
    """``L^q((-pi/2, pi/2), L^p_k)`` norm of the (time-independent) density.

    Returns ``(value, relative error estimate)``; with ``strict`` an estimate
    above ``QUAD_ERROR_TOL`` raises ``FloatingPointError``.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    lp, err = density_lp_norm(G, p, step)
    if strict and not err <= QUAD_ERROR_TOL:
        raise FloatingPointError(f"L^p quadrature error estimate {err:.1e} at eps^2 = {G.eps2}")
    return math.pi ** (1.0 / q) * lp, err


# threshold arithmetic

@dataclass
class ThresholdInfo:
    p: float
    n: int
    gamma: float
    r_star: float | None
    scaling_q: float | None
    predicted_slope: float | None
    hypothesis_ok: bool
    sharp_regime: bool
    identity_residual: float | None
    messages: list = field(default_factory=list)


def exponent_gap(p: float, n: int, gamma: float) -> float:
    """``((p+1)n - (p-1) 2 gamma) / (2p)``; the density growth exponent in ``1/(1-eps^2)``."""
    return ((p + 1) * n - (p - 1) * 2 * gamma) / (2 * p)


def threshold(p: float, n: int, gamma: float, r: float | None = None) -> ThresholdInfo:
    """``r* = 2pn / ((p+1)n - (p-1) 2 gamma)``, the scaling-line ``q`` and the predicted slope."""
    msgs = []
    denom = (p + 1) * n - (p - 1) * 2 * gamma
    hyp = p == 1 or 2 * gamma < n * (p + 1) / (p - 1)
    if not hyp:
        msgs.append(f"2*gamma = {2 * gamma:g} >= n(p+1)/(p-1) = {n * (p + 1) / (p - 1):g}")
    r_star = 2 * p * n / denom if denom > 0 else None
    if r_star is None:
        msgs.append("r* undefined: (p+1)n - (p-1)2gamma <= 0")
    sq = 2 * p / ((2 * gamma + n) * (p - 1)) if p > 1 else None
    ident = None
    if sq is not None:
        ident = abs(denom / (2 * p * n) - (1 - 1 / (n * sq)))
    sharp = 2 * gamma * (p - 1) < n
    if not sharp:
        msgs.append(f"outside the sharp regime: 2*gamma*(p-1) = {2 * gamma * (p - 1):g} >= n = {n}")
    slope = exponent_gap(p, n, gamma) - n / r if r is not None else None
    return ThresholdInfo(p=p, n=n, gamma=gamma, r_star=r_star, scaling_q=sq, predicted_slope=slope,
                         hypothesis_ok=hyp, sharp_regime=sharp, identity_residual=ident, messages=msgs)


def on_scaling_line(p: float, q: float, n: int, gamma: float, tol: float = 1e-12) -> bool:
    return abs(2 / q + (2 * gamma + n) / p - (2 * gamma + n)) <= tol


def inclusion_beta(p: float, q: float, n: int, gamma: float) -> float:
    """``beta`` in ``(0, 1]`` with ``(p, q/beta)`` on the scaling line.

    Needs ``2/q + (2 gamma+n)/p >= 2 gamma + n`` and ``p > 1``.
    """
    if p <= 1:
        raise ValueError("p must exceed 1")
    if 2 / q + (2 * gamma + n) / p < 2 * gamma + n - 1e-15:
        raise ValueError("(p, q) lies below the scaling line")
    return q * (2 * gamma + n) * (p - 1) / (2 * p)


# experiment

@dataclass
class ExperimentConfig:
    n: int
    kappa: tuple
    p: float
    q: float | None = None
    r_values: tuple = (2.0,)
    eps2_grid: tuple = DEFAULT_EPS2_GRID
    step: float = 0.05
    workers: int = 1

    def __post_init__(self):
        self.kappa = tuple(float(k) for k in np.atleast_1d(self.kappa))
        if self.p < 1:
            raise ConfigError(f"p must be >= 1, got {self.p}")
        if self.q is None:
            g = sum(self.kappa)
            self.q = 2 * self.p / ((2 * g + self.n) * (self.p - 1)) if self.p > 1 else 1.0
        if self.q < 1:
            raise ConfigError(f"q must be >= 1, got {self.q}")
        self.r_values = tuple(float(r) for r in self.r_values)
        if not self.r_values or min(self.r_values) < 1:
            raise ConfigError("Schatten exponents must be >= 1")
        self.eps2_grid = tuple(float(e) for e in self.eps2_grid)
        if not self.eps2_grid or not all(0 < e < 1 for e in self.eps2_grid):
            raise ConfigError("eps^2 grid must lie in (0, 1)")

    @property
    def structure(self) -> DunklStructure:
        return build_structure(self.n, self.kappa)

    def flags(self) -> dict:
        g = sum(self.kappa)
        info = threshold(self.p, self.n, g)
        return {"hypothesis_2gamma_lt_n(p+1)/(p-1)": info.hypothesis_ok,
                "scaling_line": on_scaling_line(self.p, self.q, self.n, g),
                "sharp_regime_2gamma(p-1)_lt_n": info.sharp_regime}

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        try:
            n = int(data["n"])
            kappa = data["kappa"]
            p = float(data["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"experiment config needs n, kappa, p: {exc}") from exc
        build_structure(n, kappa)
        r = data.get("r", data.get("r_values", [2.0]))
        grid = data.get("eps2_grid")
        if grid is None and "epsilon" in data:
            grid = [float(e) ** 2 for e in data["epsilon"]]
        return cls(n=n, kappa=tuple(np.atleast_1d(kappa)), p=p, q=data.get("q"),
                   r_values=tuple(np.atleast_1d(r)), eps2_grid=tuple(grid or DEFAULT_EPS2_GRID),
                   step=float(data.get("step", 0.05)), workers=int(data.get("workers", 1)))


@dataclass
class Row:
    r: float
    epsilon: float
    sigma: float
    Lp_norm: float
    mixed_norm: float
    schatten_r_norm: float
    ratio: float
    log_ratio: float
    quad_error: float
    status: str = "ok"


def _eval_eps(s: DunklStructure, cfg: ExperimentConfig, eps2: float):
    G = gamma_eps(s, math.sqrt(eps2))
    try:
        mix, err = mixed_norm(G, cfg.p, cfg.q, cfg.step)
        lp = mix / math.pi ** (1.0 / cfg.q)
    except (FloatingPointError, ValueError, OverflowError) as exc:
        return G, None, None, f"failed: {exc}"
    return G, (lp, mix), err, "ok"


def ratio_curve(cfg: ExperimentConfig) -> list[Row]:
    """``R(eps) = mixed_norm / schatten_norm`` on the grid, one row per ``(r, eps)``.

    Grid points are independent; a failure at one point is recorded in its
    row status and does not stop the scan. Rows come out in grid order
    regardless of ``workers``.
    """
    s = cfg.structure
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda e: _eval_eps(s, cfg, e), cfg.eps2_grid))
    else:
        results = [_eval_eps(s, cfg, e) for e in cfg.eps2_grid]
    rows = []
    for r in cfg.r_values:
        for eps2, (G, norms, err, status) in zip(cfg.eps2_grid, results):
            sch = schatten_norm(G, r)
            if norms is None:
                rows.append(Row(r, math.sqrt(eps2), 1 - eps2, math.nan, math.nan, sch,
                                math.nan, math.nan, math.nan, status))
                continue
            lp, mix = norms
            ratio = mix / sch
            rows.append(Row(r, math.sqrt(eps2), 1 - eps2, lp, mix, sch, ratio, math.log(ratio), err, status))
    return rows


def fit_slope(rows, min_eps2: float = 0.9) -> tuple[float, float]:
    """Least-squares slope of ``log R`` against ``log(1/(1-eps^2))``; returns ``(slope, stderr)``."""
    pts = [(math.log(1 / row.sigma), row.log_ratio) for row in rows
           if row.status == "ok" and 1 - row.sigma >= min_eps2 - 1e-15 and math.isfinite(row.log_ratio)]
    if len(pts) < 5:
        raise ValueError(f"need at least 5 usable rows with eps^2 >= {min_eps2}, got {len(pts)}")
    X, Y = np.array(pts).T
    if np.ptp(X) == 0:
        raise ValueError("degenerate grid: all eps equal")
    if np.ptp(Y) == 0:
        return 0.0, 0.0
    res = stats.linregress(X, Y)
    return float(res.slope), float(res.stderr)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list
    r_star: float | None
    flags: dict
    fits: dict
    messages: list

    def summary(self) -> dict:
        return {"n": self.config.n, "kappa": list(self.config.kappa), "p": self.config.p, "q": self.config.q,
                "r_star": self.r_star, "admissible_flags": self.flags, "messages": self.messages,
                "fits": {repr(r): v for r, v in self.fits.items()}}

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "report.csv"
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "epsilon", "sigma", "Lp_norm", "mixed_norm", "schatten_r_norm",
                        "ratio", "log_ratio", "quad_error", "status"])
            for row in self.rows:
                w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in asdict(row).values()])
        json_path = out / "summary.json"
        json_path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    g = sum(cfg.kappa)
    rows = ratio_curve(cfg)
    info = threshold(cfg.p, cfg.n, g)
    fits = {}
    for r in cfg.r_values:
        sub = [row for row in rows if row.r == r]
        pred = threshold(cfg.p, cfg.n, g, r).predicted_slope
        try:
            slope, err = fit_slope(sub)
        except ValueError as exc:
            fits[r] = {"predicted_slope": pred, "fitted_slope": None, "stderr": None, "error": str(exc)}
            continue
        fits[r] = {"predicted_slope": pred, "fitted_slope": slope, "stderr": err}
    return ExperimentReport(config=cfg, rows=rows, r_star=info.r_star, flags=cfg.flags(),
                            fits=fits, messages=info.messages)


def sign_change_bracket(report: ExperimentReport):
    """Adjacent ``(r_lo, r_hi)`` where the fitted slope goes from negative to positive."""
    pairs = sorted((r, v["fitted_slope"]) for r, v in report.fits.items() if v["fitted_slope"] is not None)
    for (r0, s0), (r1, s1) in zip(pairs, pairs[1:]):
        if s0 < 0 <= s1:
            return r0, r1
    return None
