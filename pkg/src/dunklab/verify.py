"""Named identity suites.

Each suite draws a fixed pseudo-random sample, compares two independent
computations and reports the worst residual against its tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import DunklStructure, ball_volume
from .fock import chaotic_transform, resolution_check, transform_matrix
from .hermite import HermiteFunctionEvaluator, eigen_check, generating_function_check, mehler_eval
from .kernels import KernelEvaluator, dunkl_kernel_closed, gaussian_pairing
from .poly import DEGREE_CUTOFFS, orthonormal_basis
from .propagators import (KernelPropagator, SpectralPropagator, coherent_image, fit_kernel_constant,
                          kernel_relation_check, relation_constant)
from .schatten import density_closed, density_propagated, density_spectral, gamma_eps


@dataclass
class SuiteResult:
    name: str
    passed: bool
    max_residual: float
    tolerance: float
    cases: int
    seconds: float = 0.0
    first_failure: str | None = None
    notes: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


class Context:
    """Structure plus lazily built basis and evaluators shared by the suites."""

    def __init__(self, s: DunklStructure, seed: int = 20240607, max_degree: int | None = None):
        self.s = s
        self.seed = seed
        self.max_degree = DEGREE_CUTOFFS.get(s.n, 16) if max_degree is None else max_degree
        self._basis = None

    @property
    def basis(self):
        if self._basis is None:
            self._basis = orthonormal_basis(self.s, self.max_degree)
        return self._basis

    @property
    def kev(self) -> KernelEvaluator:
        return KernelEvaluator(self.basis)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


def _ball(rng, n, radius, complex_=False):
    v = rng.normal(size=n) + (1j * rng.normal(size=n) if complex_ else 0)
    v = v / np.linalg.norm(v)
    return v * radius * rng.uniform() ** (1.0 / n)


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


class _Tracker:
    def __init__(self, name, tol):
        self.name, self.tol = name, tol
        self.worst, self.count, self.first = 0.0, 0, None

    def add(self, residual, label):
        self.count += 1
        if not residual <= self.tol and self.first is None:
            self.first = f"{label}: residual {residual:.3e}"
        if not math.isfinite(residual):
            residual = math.inf
        self.worst = max(self.worst, residual)

    def result(self, t0, **notes):
        return SuiteResult(self.name, self.first is None, self.worst, self.tol, self.count,
                           time.perf_counter() - t0, self.first, notes)


def suite_series(ctx: Context, count: int = 50, tol: float = 1e-9) -> SuiteResult:
    """Orthonormal-basis series against the closed product kernel."""
    t0, tr, rng = time.perf_counter(), _Tracker("series", tol), ctx.rng(1)
    kev = ctx.kev
    for i in range(count):
        z = _ball(rng, ctx.s.n, 2.0, complex_=True)
        w = _ball(rng, ctx.s.n, 2.0, complex_=True)
        a = kev(z, w)
        b = complex(dunkl_kernel_closed(ctx.s, z, w))
        tr.add(_rel(a, b), f"z={z}, w={w}")
    return tr.result(t0)


def suite_pairing(ctx: Context, count: int = 24, tol: float = 1e-8) -> SuiteResult:
    """Gaussian pairing at delta = 1/2 and on a complex delta grid."""
    t0, tr, rng = time.perf_counter(), _Tracker("pairing", tol), ctx.rng(2)
    kev = ctx.kev
    n = ctx.s.n
    deltas = [0.5] + [complex(rng.uniform(0.3, 2.0), rng.uniform(-1, 1)) for _ in range(count - 1)]
    for d in deltas:
        z = _ball(rng, n, 1.0, complex_=True)
        w = _ball(rng, n, 1.0, complex_=True)
        lhs, rhs = gaussian_pairing(kev, d, z, w)
        tr.add(_rel(lhs, rhs), f"delta={d}")
    lhs, rhs = gaussian_pairing(kev, 0.5, np.zeros(n), np.zeros(n))
    tr.add(_rel(lhs, 1 / ctx.s.c_k), "delta=1/2, z=w=0 against 1/c_k")
    return tr.result(t0)


def suite_generating(ctx: Context, count: int = 20, tol: float = 1e-8) -> SuiteResult:
    t0, tr, rng = time.perf_counter(), _Tracker("generating", tol), ctx.rng(3)
    kev = ctx.kev
    for _ in range(count):
        z = _ball(rng, ctx.s.n, 1.0)
        w = _ball(rng, ctx.s.n, 1.0, complex_=True)
        lhs, rhs = generating_function_check(kev, z, w)
        tr.add(_rel(rhs, lhs), f"z={z}, w={w}")
    return tr.result(t0)


def suite_mehler(ctx: Context, count: int = 20, tol: float = 1e-8) -> SuiteResult:
    t0, tr, rng = time.perf_counter(), _Tracker("mehler", tol), ctx.rng(4)
    kev = ctx.kev
    rmax = 0.7 if ctx.s.n <= 2 else 0.4
    for i in range(count):
        if i % 2:
            r = rmax * rng.uniform() ** 0.5 * np.exp(1j * rng.uniform(-np.pi, np.pi))
        else:
            r = rng.choice([-1, 1]) * rmax * rng.uniform(0.5, 1)
        x = _ball(rng, ctx.s.n, 1.5)
        y = _ball(rng, ctx.s.n, 1.5)
        ser, closed = mehler_eval(kev, r, x, y)
        tr.add(_rel(ser, closed), f"r={r}, x={x}, y={y}")
    return tr.result(t0)


def suite_eigen(ctx: Context, max_degree: int = 16, tol: float = 1e-10) -> SuiteResult:
    t0, tr = time.perf_counter(), _Tracker("eigen", tol)
    ev = HermiteFunctionEvaluator(ctx.basis)
    for nu in ctx.basis.indices(min(max_degree, ctx.basis.max_degree)):
        rep = eigen_check(ev, nu)
        tr.add(max(rep.residual, abs(rep.eigenvalue - rep.expected)), f"nu={nu}")
    ground = eigen_check(ev, (0,) * ctx.s.n).eigenvalue
    return tr.result(t0, ground_eigenvalue=ground)


def suite_chaotic(ctx: Context, max_degree: int = 8, tol: float = 1e-8) -> SuiteResult:
    t0, tr = time.perf_counter(), _Tracker("chaotic", tol)
    M = transform_matrix(ctx.basis, max_degree)
    tr.add(float(np.max(np.abs(M - np.eye(len(M))))), f"C_k matrix |nu| <= {max_degree}")
    nu0 = (0,) * ctx.s.n
    nu1 = (1,) + (0,) * (ctx.s.n - 1)
    fv = chaotic_transform(ctx.basis, {nu0: 1 / math.sqrt(2), nu1: 1 / math.sqrt(2)}, max_degree=max_degree)
    tr.add(abs(fv.norm() - 1.0), "norm of C_k (h_0 + h_1)/sqrt 2")
    return tr.result(t0)


def suite_resolution(ctx: Context, count: int = 10, tol: float = 1e-8) -> SuiteResult:
    t0, tr, rng = time.perf_counter(), _Tracker("resolution", tol), ctx.rng(5)
    idx = ctx.basis.indices(6)
    for _ in range(count):
        f = {idx[i]: complex(rng.normal(), rng.normal()) for i in rng.choice(len(idx), min(6, len(idx)), replace=False)}
        g = {idx[i]: complex(rng.normal(), rng.normal()) for i in rng.choice(len(idx), min(6, len(idx)), replace=False)}
        lhs, rhs = resolution_check(ctx.basis, f, g, max_degree=8)
        tr.add(abs(lhs - rhs) / max(1.0, abs(rhs)), "random 6-term pair")
    return tr.result(t0)


def suite_scaling(ctx: Context, count: int = 20, tol: float = 1e-6) -> SuiteResult:
    """Homogeneity ``w_k(B(dx, dr)) = d^(2 gamma + n) w_k(B(x, r))``."""
    t0, tr, rng = time.perf_counter(), _Tracker("scaling", tol), ctx.rng(6)
    s = ctx.s
    for _ in range(count):
        x = rng.uniform(-2, 2, s.n)
        r = rng.uniform(0.1, 2.0)
        d = rng.uniform(0.2, 5.0)
        big = ball_volume(s, d * x, d * r)
        small = ball_volume(s, x, r)
        tr.add(abs(big - d ** (2 * s.gamma + s.n) * small) / big, f"x={x}, r={r}, delta={d}")
    return tr.result(t0)


def suite_kernel_relation(ctx: Context, count: int = 30, tol: float = 1e-8) -> SuiteResult:
    t0, tr, rng = time.perf_counter(), _Tracker("kernel_relation", tol), ctx.rng(7)
    s = ctx.s
    const = relation_constant(s)
    for _ in range(count):
        x = rng.uniform(-1.5, 1.5, s.n)
        y = rng.uniform(-1.5, 1.5, s.n)
        sv = rng.choice([-1.0, 1.0]) * 10 ** rng.uniform(-3, math.log10(5))
        lhs, rhs = kernel_relation_check(s, x, y, sv)
        tr.add(_rel(lhs, const * rhs), f"x={x}, y={y}, s={sv}")
    return tr.result(t0, constant=const)


def density_eps2(ctx: Context) -> float:
    """Largest eps^2 from a fixed ladder whose truncation fits the basis."""
    for e2 in (0.5, 0.4, 0.3, 0.2, 0.1):
        if gamma_eps(ctx.s, math.sqrt(e2)).L <= ctx.basis.max_degree:
            return e2
    raise ValueError("basis too small for any density check")


def suite_density(ctx: Context, points: int = 20, times=(0.0, 0.4, 1.1, 2.5, -3.0), tol: float = 1e-8) -> SuiteResult:
    """Closed Mehler density, spectral sum and propagated sum, pairwise, plus time invariance."""
    t0, tr, rng = time.perf_counter(), _Tracker("density", tol), ctx.rng(8)
    e2 = density_eps2(ctx)
    G = gamma_eps(ctx.s, math.sqrt(e2))
    x = np.array([_ball(rng, ctx.s.n, 1.5) for _ in range(points)])
    closed = density_closed(G, x)
    spec = density_spectral(G, ctx.basis, x)
    tr.add(float(np.max(np.abs(closed - spec) / closed)), "closed vs spectral")
    for t in times:
        prop = density_propagated(G, ctx.basis, x, t)
        tr.add(float(np.max(np.abs(prop - closed) / closed)), f"propagated t={t} vs closed")
        tr.add(float(np.max(np.abs(prop - spec) / spec)), f"propagated t={t} vs spectral")
    return tr.result(t0, eps2=e2, truncation=G.L)


def suite_coherent(ctx: Context, tol: float = 1e-10) -> SuiteResult:
    t0, tr, rng = time.perf_counter(), _Tracker("coherent", tol), ctx.rng(9)
    P = SpectralPropagator(ctx.basis)
    worst_printed = 0.0
    for t in (0.0, 0.7, math.pi, -2.0, 5.0):
        z = _ball(rng, ctx.s.n, 1.0)
        rep = coherent_image(P, z, t)
        tr.add(rep.residual, f"t={t}")
        worst_printed = max(worst_printed, rep.printed_residual)
    return tr.result(t0, printed_convention_residual=worst_printed)


def suite_propagation(ctx: Context, tol: float = 1e-7) -> SuiteResult:
    """Kernel quadrature against spectral propagation up to one fitted constant."""
    t0, tr, rng = time.perf_counter(), _Tracker("propagation", tol), ctx.rng(10)
    s = ctx.s
    idx = ctx.basis.indices(3)
    coeffs = {nu: complex(rng.normal(), rng.normal()) for nu in idx[:4]}
    K = KernelPropagator(s, "hermite")
    times = (0.3, math.pi / 4, 1.5, 2.5, -1.0)
    pts = [_ball(rng, s.n, 1.2) for _ in range(4)]
    c, spread = fit_kernel_constant(K, ctx.basis, coeffs, times, pts)
    expected = 2.0 ** (-s.homogeneity)
    tr.add(spread, "spread of kernel/spectral ratios")
    tr.add(abs(c - expected) / expected, "fitted constant vs 2^-(gamma+n/2)")
    return tr.result(t0, fitted_constant=[c.real, c.imag])


SUITES = {
    "series": suite_series,
    "pairing": suite_pairing,
    "scaling": suite_scaling,
    "generating": suite_generating,
    "mehler": suite_mehler,
    "eigen": suite_eigen,
    "chaotic": suite_chaotic,
    "resolution": suite_resolution,
    "coherent": suite_coherent,
    "propagation": suite_propagation,
    "kernel_relation": suite_kernel_relation,
    "density": suite_density,
}

GROUPS = {
    "kernels": ("series", "pairing", "scaling"),
    "hermite": ("generating", "mehler", "eigen"),
    "fock": ("chaotic", "resolution"),
    "propagators": ("coherent", "propagation", "kernel_relation", "density"),
}


def expand(selection) -> list[str]:
    if not selection:
        return list(SUITES)
    out = []
    for name in selection:
        if name in GROUPS:
            out.extend(GROUPS[name])
        elif name in SUITES:
            out.append(name)
        else:
            raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES) + sorted(GROUPS)}")
    return list(dict.fromkeys(out))


def run_suites(s: DunklStructure, selection=None, ctx: Context | None = None) -> list[SuiteResult]:
    names = expand(selection)
    ctx = ctx or Context(s)
    return [SUITES[name](ctx) for name in names]
