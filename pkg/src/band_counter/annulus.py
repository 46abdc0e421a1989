"""Radial fibers ``h^2(-d^2/dr^2 - r^-1 d/dr) + (mh/r - r/2)^2`` on ``(R, 1)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .core_types import (
    BC,
    DEFAULT_CONFIG,
    Annulus,
    BoundaryPair,
    CountResult,
    FiberProblem,
    Grid,
    PotentialKind,
    SolverConfig,
    Variant,
    Weight,
    make_fiber_problem,
)
from .predictions import AnnulusPrediction, default_annulus_eps
from .scan import scan_fibers
from .strip import _gauss_nodes, count_from_records, smoothstep
from .tridiag import TempleBound, discretize, relative_eigenvalue, richardson_eigenvalue, temple_bound

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class QuasiMode:
    """``u(r) = r^m exp(-r^2/4h)``, an exact solution of ``H_m u = h u`` away from the boundary."""

    m: float
    h: float

    def __post_init__(self) -> None:
        if not (self.m > 0 and self.h > 0):
            raise ValueError("quasi-mode needs m > 0 and h > 0")

    @property
    def r_star(self) -> float:
        return math.sqrt(2.0 * self.m * self.h)

    def phi(self, r):
        """``phi(r) = r^2 - 2 r_*^2 ln r``; ``u^2 = exp(-phi/2h)``."""
        r = np.asarray(r, dtype=float)
        return r * r - 2.0 * self.r_star**2 * np.log(r)

    def phi_at(self, r: float) -> float:
        return float(self.phi(r))

    @property
    def phi_star(self) -> float:
        rs2 = self.r_star**2
        return rs2 * (1.0 - math.log(rs2))

    @property
    def laplace_norm(self) -> float:
        """Leading term of ``int |u|^2 r dr`` over a range containing ``r_*``."""
        return math.sqrt(math.pi * self.h) * self.r_star * math.exp(-self.phi_star / (2.0 * self.h))

    def log_u(self, r):
        r = np.asarray(r, dtype=float)
        return self.m * np.log(r) - r * r / (4.0 * self.h)

    def dlog_u(self, r):
        r = np.asarray(r, dtype=float)
        return self.m / r - r / (2.0 * self.h)


def _variant(variant: Variant | str) -> Variant:
    variant = Variant(variant)
    if variant not in (Variant.MIXED_DN, Variant.PURE_NN):
        raise ValueError(f"annulus fibers use MixedDN or PureNN, got {variant.value}")
    return variant


def band0_annulus_shift(
    R: float, m: int, h: float, variant: Variant | str = Variant.MIXED_DN, config: SolverConfig = DEFAULT_CONFIG
) -> tuple[float, float]:
    problem = make_fiber_problem(Annulus(R), m, h, _variant(variant))
    return richardson_eigenvalue(problem, 0, None, config, "fitted", relative=True)


def band0_annulus(
    R: float, m: int, h: float, variant: Variant | str = Variant.MIXED_DN, config: SolverConfig = DEFAULT_CONFIG
) -> float:
    """``lambda_0(H_m)``; ``PureNN`` puts Neumann on both circles of ``(R, 1)``."""
    return h + band0_annulus_shift(R, m, h, variant, config)[0]


def excited_annulus(
    R: float, m: int, h: float, variant: Variant | str = Variant.MIXED_DN, config: SolverConfig = DEFAULT_CONFIG
) -> float:
    problem = make_fiber_problem(Annulus(R), m, h, _variant(variant))
    return h + richardson_eigenvalue(problem, 1, None, config, "fitted", relative=True)[0]


# -- quasi-mode checks ----------------------------------------------------------------


def quasimode_residual(
    R: float, m: int, h: float, grid: Grid | None = None, include_boundary: bool = False
) -> float:
    """Relative residual ``||(A - h) w|| / ||w||`` of the sampled quasi-mode.

    ``w = sqrt(r) u`` on the standard mixed-condition discretization; the two
    boundary rows, where ``u`` does not meet the imposed conditions, are
    dropped unless ``include_boundary`` is set.
    """
    problem = make_fiber_problem(Annulus(R), m, h, Variant.MIXED_DN)
    if grid is None:
        grid = Grid.for_problem(problem)
    op = discretize(problem, grid)
    qm = QuasiMode(m, h)
    logw = qm.log_u(op.nodes) + 0.5 * np.log(op.nodes)
    y = np.exp(logw - logw.max() + 0.5 * (op.log_mass - op.log_mass.max()))
    ay = op.diag * y
    ay[:-1] += op.offdiag * y[1:]
    ay[1:] += op.offdiag * y[:-1]
    res = ay - h * y
    if not include_boundary:
        res, y = res[1:-1], y[1:-1]
    return float(np.linalg.norm(res) / np.linalg.norm(y))


def _check_rstar(R: float, m: float, h: float, eps: float) -> QuasiMode:
    qm = QuasiMode(m, h)
    rs2 = qm.r_star**2
    if not R * R + eps <= rs2 <= 1.0 - eps:
        raise ValueError(f"r_*^2 = {rs2:.4g} outside [R^2 + eps, 1 - eps] = [{R*R + eps:.4g}, {1 - eps:.4g}]")
    return qm


def laplace_norm_check(R: float, m: int, h: float, eps: float | None = None) -> tuple[float, float, float]:
    """``(exact, predicted, exact/predicted)`` for ``int_R^1 |u|^2 r dr``.

    ``exact`` is a trapezoid sum at spacing ``sqrt(h)/64``.
    """
    eps = default_annulus_eps(R) if eps is None else eps
    qm = _check_rstar(R, m, h, eps)
    n = math.ceil((1.0 - R) / (math.sqrt(h) / 64))
    r = np.linspace(R, 1.0, n + 1)
    logf = 2.0 * qm.log_u(r) + np.log(r)
    wts = np.full(r.size, (1.0 - R) / n)
    wts[[0, -1]] *= 0.5
    exact = float(np.exp(logsumexp(logf, b=wts)))
    predicted = qm.laplace_norm
    return exact, predicted, exact / predicted


def annulus_boundary_term(m: float, h: float, step: float | None = None) -> float:
    """``u'(1) u(1)`` with a central-difference derivative."""
    step = math.sqrt(h) / 64 if step is None else step
    qm = QuasiMode(m, h)
    u = lambda r: math.exp(float(qm.log_u(r)))  # noqa: E731
    return u(1.0) * (u(1.0 + step) - u(1.0 - step)) / (2.0 * step)


def default_eta(R: float, m: float, h: float, eps: float | None = None) -> float:
    """Largest ``eta = min(eps, r_* - R) / 2^k``, ``k >= 1``, with ``phi(1) < phi(R + eta) - eps |ln R|``."""
    eps = default_annulus_eps(R) if eps is None else eps
    qm = QuasiMode(m, h)
    eta = 0.5 * min(eps, qm.r_star - R)
    for _ in range(60):
        if eta > 0 and qm.phi_at(1.0) < qm.phi_at(R + eta) - eps * abs(math.log(R)):
            return eta
        eta *= 0.5
    raise ValueError("no admissible eta: r_* is too close to the transition radius")


def quasimode_rayleigh_annulus(
    R: float, m: int, h: float, eta: float | None = None, eps: float | None = None, cells: int | None = None
) -> float:
    """Rayleigh quotient minus ``h`` of ``chi u``, ``chi = 0`` on ``[R, R + eta/2]``, 1 on ``[R + eta, 1]``.

    Gauss-Legendre quadrature of the continuous radial form with weight ``r dr``.
    """
    eps = default_annulus_eps(R) if eps is None else eps
    pred = AnnulusPrediction(R)
    lo, hi = pred.window_I(h, eps)
    if not lo <= m <= hi:
        raise ValueError(f"m = {m} outside the favorable window [{lo:.1f}, {hi:.1f}]")
    if eta is None:
        eta = default_eta(R, m, h, eps)
    qm = QuasiMode(m, h)
    if not (0 < eta < eps and R + eta < qm.r_star):
        raise ValueError("eta must satisfy 0 < eta < eps and R + eta < r_*")
    if not qm.phi_at(1.0) < qm.phi_at(R + eta) - eps * abs(math.log(R)):
        raise ValueError("eta violates phi(1) < phi(R + eta) - eps |ln R|")
    if cells is None:
        cells = max(512, math.ceil(32 * (1.0 - R) / math.sqrt(h)))
    r, w = _gauss_nodes(R, 1.0, cells)
    chi, dchi = smoothstep((r - R - eta / 2) / (eta / 2))
    dchi = dchi / (eta / 2)
    logu = qm.log_u(r)
    u = np.exp(logu - logu.max())
    du = qm.dlog_u(r) * u
    f = chi * u
    df = dchi * u + chi * du
    pot = (m * h / r - r / 2.0) ** 2
    norm = np.sum(w * f * f * r)
    form = np.sum(w * (h * h * df * df + (pot - h) * f * f) * r)
    return float(form / norm)


# -- counting -------------------------------------------------------------------------


def count_annulus(
    R: float,
    h: float,
    tol: float = 1e-12,
    config: SolverConfig = DEFAULT_CONFIG,
    jobs: int | None = 1,
    variant: Variant | str = Variant.MIXED_DN,
) -> CountResult:
    """Count momenta with ``lambda_0(H_m) < h`` over the rough window."""
    variant = _variant(variant)
    if tol != config.rtol:
        config = replace(config, rtol=tol)
    pred = AnnulusPrediction(R)
    momenta = pred.momenta(h)
    if len(momenta) < 10:
        raise ValueError(f"rough window holds only {len(momenta)} momenta; decrease h")
    records = scan_fibers(Annulus(R), momenta, h, variant, config, jobs)
    predicted = pred.predicted_count(h) if variant is Variant.MIXED_DN else pred.neumann_count(h)
    return count_from_records(records, h, Annulus(R), variant, predicted)


def crossover_from_count(result: CountResult) -> int:
    """Lower end of the longest run of consecutive momenta below ``h``."""
    best_len, best_start = 0, None
    run_len, run_start = 0, None
    for m in sorted(result.below):
        if result.below[m]:
            if run_len == 0:
                run_start = m
            run_len += 1
            if run_len > best_len:
                best_len, best_start = run_len, run_start
        else:
            run_len = 0
    if best_start is None:
        raise ValueError("no momentum lies below h; the scan window is misconfigured")
    return best_start


def transition_scan(
    R: float, h: float, config: SolverConfig = DEFAULT_CONFIG, jobs: int | None = 1
) -> tuple[int, float]:
    """``(empirical crossover momentum, predicted R~^2/2h)``."""
    result = count_annulus(R, h, config.rtol, config, jobs)
    return crossover_from_count(result), AnnulusPrediction(R).transition(h)


# -- Temple certificate on the exterior Dirichlet problem ---------------------------------


def halfdisc_problem(R: float, m: float, h: float, config: SolverConfig = DEFAULT_CONFIG) -> FiberProblem:
    """``H_m`` on ``(R, r_* + T sqrt h)``, Dirichlet at both ends (``T`` = truncation)."""
    qm = QuasiMode(m, h)
    b = qm.r_star + config.truncation * math.sqrt(h)
    return FiberProblem(
        (R, b), h, float(m), PotentialKind.ANNULUS_RADIAL, Weight.RADIAL, BoundaryPair(BC.DIRICHLET, BC.DIRICHLET)
    )


def halfdisc_trial(R: float, m: float, h: float, r: np.ndarray) -> np.ndarray:
    """``f`` of the trial ``v = f u``: ``f(r) = int_R^r chi / (rho u^2)``, scaled to max 1.

    ``chi`` is 1 up to ``(R + r_*)/2`` and falls smoothly to 0 at ``r_*``, so
    ``v`` solves ``H_m v = h v`` exactly outside the ramp and vanishes at ``R``.
    """
    qm = QuasiMode(m, h)
    rs = qm.r_star
    a0 = 0.5 * (R + rs)
    r = np.asarray(r, dtype=float)
    edges = np.concatenate([[R], r[r > R]])
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = mid[:, None] + half[:, None] * _GL_X[None, :]
    chi, _ = smoothstep((rs - t) / (rs - a0))
    with np.errstate(divide="ignore"):
        logint = np.log(chi) - np.log(t) - 2.0 * qm.log_u(t)
    cell = logsumexp(logint, b=half[:, None] * _GL_W[None, :], axis=1)
    logf = np.logaddexp.accumulate(cell)
    out = np.zeros(r.size)
    out[r > R] = np.exp(logf - logf.max())
    return out


def dirichlet_halfdisc_bounds(
    R: float,
    m: float,
    h: float,
    config: SolverConfig = DEFAULT_CONFIG,
    beta: float | None = None,
    eps: float | None = None,
) -> TempleBound:
    """Temple enclosure of ``lambda_0 - h`` for ``H_m`` on ``r > R`` with Dirichlet at ``R``.

    Requires ``r_* > R + eps``; ``beta`` defaults to ``h``.
    """
    qm = QuasiMode(m, h)
    eps = default_annulus_eps(R) if eps is None and R < 1 else (0.1 if eps is None else eps)
    if not qm.r_star > R + eps:
        raise ValueError(f"the exterior certificate needs r_* > R + eps, got r_* = {qm.r_star:.4g}")
    problem = halfdisc_problem(R, m, h, config)
    op = discretize(problem, None, config, "fitted")
    f = halfdisc_trial(R, m, h, op.nodes)
    beta = h if beta is None else beta
    return temple_bound(op, f, h, beta, native=True)


def halfdisc_shifts(R: float, m: float, h: float, config: SolverConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """``(lambda_0 - h, lambda_1 - h)`` of the same discrete exterior operator."""
    op = discretize(halfdisc_problem(R, m, h, config), None, config, "fitted")
    return relative_eigenvalue(op, 0, config.rtol), relative_eigenvalue(op, 1, config.rtol)


def halfdisc_exponent(R: float, m: float, h: float) -> float:
    """``(phi(R) - phi(r_*)) / 2h``, the decay rate of the upper bound."""
    qm = QuasiMode(m, h)
    return (qm.phi_at(R) - qm.phi_star) / (2.0 * h)
