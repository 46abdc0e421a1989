"""Pruefer-phase shooting, an independent check on the tridiagonal counts.

With ``S u = rho sin(theta)`` and ``h^2 u' = rho cos(theta)`` the phase obeys
``theta' = (S/h^2) cos^2 + ((E - V)/S) sin^2`` and increases with ``E``.
Radial problems are shot in the same Liouville-flat coordinates the matrix
solver uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .core_types import BC, DEFAULT_CONFIG, FiberProblem, PotentialKind, SolverConfig, Weight

_MAX_PHASE_STEP = math.pi / 8
_TARGET_PHASE_STEP = math.pi / 64


class StepResolutionError(ValueError):
    """The requested step count lets the phase jump by more than pi/8."""


@dataclass(frozen=True)
class ShootingResult:
    eigenvalue_count_below: int
    eigenvalues: tuple[float, ...]
    integrator_steps: int


def _potential_args(problem: FiberProblem):
    empty = np.zeros(1)
    if problem.potential is PotentialKind.CUSTOM:
        xs, vs = (np.asarray(s, dtype=float) for s in problem.samples)  # type: ignore[misc]
        return _kernels.POT_SAMPLED, 0.0, 0.0, xs, vs
    if problem.weight is Weight.RADIAL:
        return _kernels.POT_RADIAL_FLAT, problem.m * problem.h, problem.h, empty, empty
    if problem.potential is PotentialKind.ANNULUS_RADIAL:
        raise ValueError("radial potential with flat weight is not supported")
    return _kernels.POT_SHIFTED_SQUARE, problem.xi, 0.0, empty, empty


def _boundary_angle(problem: FiberProblem, x: float, bc: BC, scale: float, left: bool) -> float:
    """Phase encoding the endpoint condition: 0 / pi for Dirichlet, Robin angle otherwise."""
    if bc is BC.DIRICHLET:
        return 0.0 if left else math.pi
    return math.atan2(scale, problem.h**2 * problem.robin(x))


def _max_rate(problem: FiberProblem, energy: float) -> tuple[float, float]:
    """(phase scale S, bound on |theta'|) at ``energy``."""
    a, b = problem.interval
    code, p0, p1, xs, vs = _potential_args(problem)
    vmin, vmax = _kernels.potential_extremes(a, b, 4096, code, p0, p1, xs, vs)
    spread = max(abs(energy - vmin), abs(energy - vmax), problem.h)
    scale = problem.h * math.sqrt(spread)
    return scale, math.sqrt(spread) / problem.h


def default_steps(problem: FiberProblem, energy: float, config: SolverConfig = DEFAULT_CONFIG) -> int:
    problem = problem.resolved(config)
    _, rate = _max_rate(problem, energy)
    a, b = problem.interval
    return max(256, math.ceil(rate * (b - a) / _TARGET_PHASE_STEP))


def prufer_phase(
    problem: FiberProblem,
    energy: float,
    steps: int | None = None,
    config: SolverConfig = DEFAULT_CONFIG,
    scale: float | None = None,
) -> tuple[float, float, int]:
    """Terminal phase ``theta(b)``, the right-end target phase, and the step count."""
    problem = problem.resolved(config)
    a, b = problem.interval
    auto_scale, rate = _max_rate(problem, energy)
    if scale is None:
        scale = auto_scale
    else:
        rate = max(scale / problem.h**2, rate * auto_scale / scale)
    if steps is None:
        steps = max(256, math.ceil(rate * (b - a) / _TARGET_PHASE_STEP))
    elif rate * (b - a) / steps > _MAX_PHASE_STEP:
        need = math.ceil(rate * (b - a) / _MAX_PHASE_STEP)
        raise StepResolutionError(f"{steps} steps let the phase advance more than pi/8 per step; need >= {need}")
    theta0 = _boundary_angle(problem, a, problem.bc.left, scale, left=True)
    target = _boundary_angle(problem, b, problem.bc.right, scale, left=False)
    code, p0, p1, xs, vs = _potential_args(problem)
    theta = _kernels.prufer_rk4(a, b, steps, theta0, float(energy), scale, problem.h**2, code, p0, p1, xs, vs)
    return float(theta), target, steps


def _count_from_phase(theta: float, target: float) -> int:
    return max(0, math.ceil((theta - target) / math.pi))


def shoot_count(
    problem: FiberProblem,
    threshold: float,
    steps: int | None = None,
    config: SolverConfig = DEFAULT_CONFIG,
) -> int:
    """Eigenvalues strictly below ``threshold`` from the accumulated phase."""
    theta, target, _ = prufer_phase(problem, threshold, steps, config)
    return _count_from_phase(theta, target)


def shoot_eigenvalue(
    problem: FiberProblem,
    k: int,
    tol: float = 1e-10,
    steps: int | None = None,
    config: SolverConfig = DEFAULT_CONFIG,
) -> float:
    """Bisection on :func:`shoot_count` for the k-th eigenvalue."""
    if k < 0:
        raise IndexError("eigenvalue index must be nonnegative")
    problem = problem.resolved(config)
    a, b = problem.interval
    code, p0, p1, xs, vs = _potential_args(problem)
    vmin, _ = _kernels.potential_extremes(a, b, 4096, code, p0, p1, xs, vs)
    lo = vmin - problem.h
    while shoot_count(problem, lo, steps, config) > 0:
        lo -= 2.0 * (abs(lo) + problem.h)
    hi = lo + 2.0 * problem.h
    while shoot_count(problem, hi, steps, config) <= k:
        hi = lo + 2.0 * (hi - lo)
    # steps fixed at the top of the bracket keep counts consistent across energies
    if steps is None:
        steps = default_steps(problem, hi, config)
    scale_ref = max(abs(lo), abs(hi), problem.h)
    while hi - lo > tol * scale_ref:
        mid = 0.5 * (lo + hi)
        if shoot_count(problem, mid, steps, config) > k:
            hi = mid
        else:
            lo = mid
        scale_ref = max(abs(lo), abs(hi), problem.h) if lo * hi <= 0 else max(abs(lo), abs(hi))
    return 0.5 * (lo + hi)


def shoot(
    problem: FiberProblem,
    threshold: float,
    n_eigenvalues: int = 0,
    tol: float = 1e-10,
    config: SolverConfig = DEFAULT_CONFIG,
) -> ShootingResult:
    steps = default_steps(problem, threshold, config)
    count = shoot_count(problem, threshold, steps, config)
    eigs = tuple(shoot_eigenvalue(problem, k, tol, None, config) for k in range(n_eigenvalues))
    return ShootingResult(count, eigs, steps)


# -- closed-form phase at the reference level ---------------------------------------


def _log_cumint(logf, a: float, b: float, cells: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.linspace(a, b, cells + 1)
    gx, gw = np.polynomial.legendre.leggauss(8)
    mid = 0.5 * (x[:-1] + x[1:])
    half = 0.5 * (x[1:] - x[:-1])
    t = mid[:, None] + half[:, None] * gx[None, :]
    cell = logsumexp(logf(t), b=half[:, None] * gw[None, :], axis=1)
    return x, np.concatenate([[-np.inf], np.logaddexp.accumulate(cell)])


def reference_level_count(problem: FiberProblem, config: SolverConfig = DEFAULT_CONFIG) -> int:
    """Eigenvalues strictly below ``h`` from the exact solution at energy ``h``.

    The shooting solution is built from the positive solution ``g`` by
    reduction of order (``u = g (c0 + c1 int g^-2)``), so it has at most one
    zero and its terminal Pruefer phase follows in closed form. Exact up to
    quadrature, independent of any grid, and sharp even when the ground level
    differs from ``h`` by far less than machine precision relative to ``h``.
    """
    problem = problem.resolved(config)
    if not problem.has_reference_solution:
        raise ValueError("closed-form phase needs a reference solution")
    h = problem.h
    a, b = problem.interval
    logg = problem.reference_log
    cells = max(64, math.ceil(64 * (b - a) / math.sqrt(h)))
    _, log_i = _log_cumint(lambda t: -2.0 * logg(t), a, b, cells)
    log_ib = float(log_i[-1])
    lg_b = float(logg(np.array(b)))
    ell_b = float(problem.reference_dlog(np.array(b)))
    scale = h * math.sqrt(h)

    # W(b) and W'(b) g(b)^2 as (sign, log-magnitude) pairs
    if problem.bc.left is BC.DIRICHLET:
        zeros = 0
        w_sign, w_log = 1.0, log_ib
        c1_sign, c1_log = 1.0, 0.0
    else:
        lg_a = float(logg(np.array(a)))
        cgap = problem.robin(a) - float(problem.reference_dlog(np.array(a)))
        if cgap == 0.0:
            zeros = 0
            w_sign, w_log = 1.0, 0.0
            c1_sign, c1_log = 0.0, -np.inf
        else:
            c1_sign = math.copysign(1.0, cgap)
            c1_log = 2.0 * lg_a + math.log(abs(cgap))
            # W = 1 + C I(b); negative C can produce one zero
            ci_log = c1_log + log_ib
            if c1_sign > 0:
                zeros, w_sign, w_log = 0, 1.0, float(np.logaddexp(0.0, ci_log))
            elif ci_log > 0:
                zeros, w_sign, w_log = 1, -1.0, ci_log + math.log1p(-math.exp(-ci_log))
            elif ci_log < 0:
                zeros, w_sign, w_log = 0, 1.0, math.log(-math.expm1(ci_log))
            else:
                zeros, w_sign, w_log = 0, 0.0, -np.inf

    # S u(b) ~ S W ; h^2 u'(b) ~ h^2 (ell_b W + C g(b)^-2), common factor g(b) dropped
    d_log = c1_log - 2.0 * lg_b
    top = max(w_log, d_log)
    w_val = w_sign * math.exp(w_log - top) if np.isfinite(w_log) else 0.0
    d_val = c1_sign * math.exp(d_log - top) if np.isfinite(d_log) else 0.0
    su = scale * w_val
    pu = h * h * (ell_b * w_val + d_val)
    sgn = -1.0 if zeros % 2 else 1.0
    theta_b = zeros * math.pi + math.atan2(sgn * su, sgn * pu)
    target = _boundary_angle(problem, b, problem.bc.right, scale, left=False)
    return _count_from_phase(theta_b, target)
