"""Finite-difference fiber operators, Sturm counts, bisection and Richardson.

Two discretizations share the :class:`DiscreteOperator` container.

``scheme="standard"``
    Central differences for ``-h^2 w'' + V w`` on a uniform grid, ghost-node
    reflection at Neumann/Robin ends, symmetrized by the half-mass of the
    boundary row. Eigenvalues converge at second order.

``scheme="fitted"``
    Writes ``u = g w`` with ``g`` the positive closed-form solution at the
    Landau level ``h`` and discretizes the form of ``H - h`` with exponentially
    fitted conductances ``h^2 / int g^-2`` and masses ``int g^2``. The stored
    matrix has eigenvalues ``lambda - h`` directly, so eigenvalues that differ
    from ``h`` by far less than the grid error keep their sign and relative
    accuracy. Also second order, hence Richardson-compatible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import logsumexp

from . import _kernels
from .core_types import BC, DEFAULT_CONFIG, FiberProblem, Grid, SolverConfig, SpectrumResult

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_EPS = np.finfo(float).eps


class ResolutionError(ValueError):
    """Grid too coarse for the oscillator length ``sqrt(h)``."""


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Symmetric tridiagonal matrix plus what is needed to interpret it.

    The matrix acts on ``y = sqrt(mass) * w``; ``w`` is the flat-measure
    unknown (``sqrt(r) u`` for radial problems) for the standard scheme and
    ``w = u_flat / g`` for the fitted one. Eigenvalues of the stored matrix
    plus ``offset`` are the eigenvalues of the operator.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    grid: Grid
    nodes: np.ndarray
    jacobian: np.ndarray
    weight_samples: np.ndarray
    problem: FiberProblem
    scheme: str = "standard"
    offset: float = 0.0
    log_mass: np.ndarray | None = None
    log_reference: np.ndarray | None = None
    up: np.ndarray | None = None
    low: np.ndarray | None = None
    excess: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def norm_bound(self) -> float:
        """Gershgorin bound on the spectral radius."""
        rad = np.abs(self.diag).copy()
        rad[:-1] += np.abs(self.offdiag)
        rad[1:] += np.abs(self.offdiag)
        return float(rad.max())

    @property
    def pivmin(self) -> float:
        return max(_EPS * self.norm_bound, np.finfo(float).tiny)

    @property
    def is_fitted(self) -> bool:
        return self.up is not None


# -- construction ---------------------------------------------------------------


def check_resolution(problem: FiberProblem, grid: Grid, config: SolverConfig = DEFAULT_CONFIG) -> None:
    limit = math.sqrt(problem.h) / config.min_resolution
    if grid.spacing > limit * (1.0 + 1e-9):
        raise ResolutionError(
            f"grid spacing {grid.spacing:.3g} exceeds sqrt(h)/{config.min_resolution:g} = {limit:.3g}"
        )


def _unknown_range(problem: FiberProblem, cells: int) -> tuple[int, int]:
    lo = 1 if problem.bc.left is BC.DIRICHLET else 0
    hi = cells - 1 if problem.bc.right is BC.DIRICHLET else cells
    return lo, hi


def discretize(
    problem: FiberProblem,
    grid: Grid | None = None,
    config: SolverConfig = DEFAULT_CONFIG,
    scheme: str = "standard",
) -> DiscreteOperator:
    """Assemble the tridiagonal operator of ``problem`` on ``grid``."""
    problem = problem.resolved(config)
    if grid is None:
        grid = Grid.for_problem(problem, config)
    a, b = problem.interval
    if not (math.isclose(grid.a, a, abs_tol=1e-14) and math.isclose(grid.b, b, abs_tol=1e-14)):
        raise ValueError(f"grid [{grid.a}, {grid.b}] does not span the problem interval {problem.interval}")
    if a <= 0 and problem.weight.value == "Radial":
        raise ValueError("radial problems need an interval away from r = 0")
    check_resolution(problem, grid, config)
    if scheme == "standard":
        return _standard(problem, grid)
    if scheme == "fitted":
        if not problem.has_reference_solution:
            raise ValueError("the fitted scheme needs a closed-form reference solution")
        return _fitted(problem, grid)
    raise ValueError(f"unknown scheme {scheme!r}")


def _standard(problem: FiberProblem, grid: Grid) -> DiscreteOperator:
    x = grid.vertices()
    cells = grid.cells
    dx = grid.spacing
    lo, hi = _unknown_range(problem, cells)
    nodes = x[lo : hi + 1]
    c = problem.h**2 / dx**2
    diag = 2.0 * c + problem.flat_potential(nodes)
    mass = np.ones_like(nodes)
    if problem.bc.left is BC.NEUMANN:
        diag[0] = 2.0 * c * (1.0 + dx * problem.robin(x[0])) + diag[0] - 2.0 * c
        mass[0] = 0.5
    if problem.bc.right is BC.NEUMANN:
        diag[-1] = 2.0 * c * (1.0 - dx * problem.robin(x[-1])) + diag[-1] - 2.0 * c
        mass[-1] = 0.5
    # ghost reflection doubles the inner coupling of a boundary row; splitting
    # that factor symmetrically gives off-diagonals -c/sqrt(mass_i mass_j)
    off = -c / np.sqrt(mass[:-1] * mass[1:])
    return DiscreteOperator(
        diag=diag,
        offdiag=off,
        grid=grid,
        nodes=nodes,
        jacobian=problem.jacobian(nodes),
        weight_samples=np.ones_like(nodes),
        problem=problem,
        scheme="standard",
        log_mass=np.log(mass * dx),
    )


def _cell_logint(logf, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """``log int_left^right exp(logf(t)) dt`` by 8-point Gauss-Legendre per cell."""
    mid = 0.5 * (left + right)
    half = 0.5 * (right - left)
    t = mid[:, None] + half[:, None] * _GL_X[None, :]
    return logsumexp(logf(t), b=half[:, None] * _GL_W[None, :], axis=1)


def _fitted(problem: FiberProblem, grid: Grid) -> DiscreteOperator:
    h = problem.h
    x = grid.vertices()
    cells = grid.cells
    logg = problem.reference_log
    mids = 0.5 * (x[:-1] + x[1:])
    log_k = 2.0 * math.log(h) - _cell_logint(lambda t: -2.0 * logg(t), x[:-1], x[1:])
    left_half = _cell_logint(lambda t: 2.0 * logg(t), x[:-1], mids)
    right_half = _cell_logint(lambda t: 2.0 * logg(t), mids, x[1:])
    log_m = np.full(cells + 1, -np.inf)
    log_m[:-1] = np.logaddexp(log_m[:-1], left_half)
    log_m[1:] = np.logaddexp(log_m[1:], right_half)

    lo, hi = _unknown_range(problem, cells)
    idx = np.arange(lo, hi + 1)
    lm = log_m[idx]
    up = np.zeros(idx.size)
    low = np.zeros(idx.size)
    exc = np.zeros(idx.size)
    has_right = idx < cells
    up[has_right] = np.exp(log_k[idx[has_right]] - lm[has_right])
    has_left = idx > 0
    low[has_left] = np.exp(log_k[idx[has_left] - 1] - lm[has_left])

    a, b = problem.interval
    if problem.bc.left is BC.DIRICHLET:
        exc[0] += low[0]
        low[0] = 0.0
    else:
        gap = float(problem.reference_dlog(np.array(a))) - problem.robin(a)
        exc[0] -= h * h * math.exp(2.0 * float(logg(np.array(a))) - lm[0]) * gap
    if problem.bc.right is BC.DIRICHLET:
        exc[-1] += up[-1]
        up[-1] = 0.0
    else:
        gap = float(problem.reference_dlog(np.array(b))) - problem.robin(b)
        exc[-1] += h * h * math.exp(2.0 * float(logg(np.array(b))) - lm[-1]) * gap

    nodes = x[idx]
    return DiscreteOperator(
        diag=up + low + exc,
        offdiag=-np.sqrt(up[:-1] * low[1:]),
        grid=grid,
        nodes=nodes,
        jacobian=problem.jacobian(nodes),
        weight_samples=np.ones_like(nodes),
        problem=problem,
        scheme="fitted",
        offset=problem.reference_level,
        log_mass=lm,
        log_reference=logg(nodes),
        up=up,
        low=low,
        excess=exc,
    )


# -- counting and eigenvalues -----------------------------------------------------


def count_relative(op: DiscreteOperator, mu: float) -> int:
    """Eigenvalues strictly below ``offset + mu``, with ``mu`` taken exactly."""
    if op.is_fitted:
        return int(_kernels.pencil_count(op.up, op.low, op.excess, float(mu)))
    return int(_kernels.sturm_count(op.diag, op.offdiag**2, float(mu), op.pivmin))


def count_below(op: DiscreteOperator, threshold: float) -> int:
    """Exact number of eigenvalues of the discrete operator strictly below ``threshold``."""
    return count_relative(op, float(threshold) - op.offset)


def relative_eigenvalue(op: DiscreteOperator, k: int, tol: float = 1e-12) -> float:
    """``lambda_k - offset``; for fitted operators accurate relative to itself."""
    if not 0 <= k < op.n:
        raise IndexError(f"eigenvalue index {k} out of range for n = {op.n}")
    if tol < 10 * _EPS:
        raise ValueError("tolerance below 10 machine epsilons")
    bound = op.norm_bound * (1.0 + 1e-12) + 1.0
    if op.is_fitted:
        return float(_kernels.pencil_kth(op.up, op.low, op.excess, k, bound, tol))
    scale = op.problem.h
    return float(
        _kernels.sturm_kth(op.diag, op.offdiag**2, k, -bound, bound, tol, tol * scale, op.pivmin)
    )


def eigenvalue(op: DiscreteOperator, k: int, tol: float = 1e-12) -> float:
    """The k-th (0-based) eigenvalue of the discrete operator by Sturm bisection."""
    return op.offset + relative_eigenvalue(op, k, tol)


def ground_state(op: DiscreteOperator, max_iter: int = 50) -> np.ndarray:
    """Positive, unit-norm ground state sampled at ``op.nodes``.

    Values are in the original coordinate ``u`` (the Liouville factor is
    removed for radial problems), normalized so that the discrete
    ``int u^2 weight`` equals 1.
    """
    mu0 = relative_eigenvalue(op, 0)
    if op.n > 1:
        mu1 = relative_eigenvalue(op, 1, 1e-8)
        if not mu1 - mu0 > 1e-10 * max(op.norm_bound, 1e-300):
            raise ConvergenceError("ground state is not separated from the first excited level")
    shift = mu0 - 1e-10 * max(abs(mu0), op.problem.h * 1e-6)
    ab = np.zeros((3, op.n))
    ab[0, 1:] = op.offdiag
    ab[1] = op.diag - shift
    ab[2, :-1] = op.offdiag
    y = np.ones(op.n)
    for _ in range(max_iter):
        z = solve_banded((1, 1), ab, y)
        z /= np.linalg.norm(z)
        resid = op.diag * z - mu0 * z
        resid[:-1] += op.offdiag * z[1:]
        resid[1:] += op.offdiag * z[:-1]
        done = np.linalg.norm(z - y) < 1e-13 or np.linalg.norm(resid) <= 1e-10 * op.norm_bound
        y = z
        if done:
            break
    else:
        raise ConvergenceError("inverse iteration did not converge")
    if y.sum() < 0:
        y = -y
    y = _refine_tails(op.diag, op.offdiag, mu0, y)
    log_scale = -0.5 * op.log_mass
    if op.is_fitted:
        log_scale = log_scale + op.log_reference
    u = y * np.exp(log_scale) / op.jacobian
    return u


def _refine_tails(diag: np.ndarray, off: np.ndarray, lam: float, y: np.ndarray) -> np.ndarray:
    """Rebuild entries below roundoff of the peak from the ratio recurrences.

    Pivots of the trailing and leading blocks of ``A - lambda_0`` are positive
    by interlacing, so the ratios are positive and free of cancellation.
    """
    n = y.size
    p = int(np.argmax(y))
    z = np.empty(n)
    z[p] = y[p]
    t = np.empty(n)
    if p < n - 1:
        t[n - 1] = -off[n - 2] / (diag[n - 1] - lam)
        for i in range(n - 2, p, -1):
            t[i] = -off[i - 1] / (diag[i] - lam + off[i] * t[i + 1])
        for i in range(p + 1, n):
            z[i] = z[i - 1] * t[i]
    if p > 0:
        t[0] = -off[0] / (diag[0] - lam)
        for i in range(1, p):
            t[i] = -off[i] / (diag[i] - lam + off[i - 1] * t[i - 1])
        for i in range(p - 1, -1, -1):
            z[i] = z[i + 1] * t[i]
    small = np.abs(y) < 1e-8 * y[p]
    if not (np.all(np.isfinite(z)) and np.all(z[small] >= 0)):
        return y
    out = y.copy()
    out[small] = z[small]
    return out


def ground_state_weights(op: DiscreteOperator) -> np.ndarray:
    """Quadrature weights ``w_j`` with ``sum w_j u_j^2`` the discrete norm of :func:`ground_state`."""
    if op.is_fitted:
        return np.exp(op.log_mass - 2.0 * op.log_reference) * op.jacobian**2
    return np.exp(op.log_mass) * op.jacobian**2


def richardson_eigenvalue(
    problem: FiberProblem,
    k: int,
    grid: Grid | None = None,
    config: SolverConfig = DEFAULT_CONFIG,
    scheme: str = "standard",
    relative: bool = False,
) -> tuple[float, float]:
    """Fourth-order Richardson value of ``lambda_k`` from grids ``n`` and ``2n+1``.

    Returns ``(value, error_estimate)`` with ``value = (4 l_fine - l_coarse)/3``
    and ``error_estimate = |l_fine - l_coarse|/3``. With ``relative=True`` the
    value is ``lambda_k - offset`` (``offset = h`` for the fitted scheme).
    """
    problem = problem.resolved(config)
    if grid is None:
        grid = Grid.for_problem(problem, config)
    coarse = discretize(problem, grid, config, scheme)
    fine = discretize(problem, grid.refined(), config, scheme)
    lc = relative_eigenvalue(coarse, k, config.rtol)
    lf = relative_eigenvalue(fine, k, config.rtol)
    value = (4.0 * lf - lc) / 3.0
    err = abs(lf - lc) / 3.0
    if not relative:
        value += coarse.offset
    return value, err


def spectrum(
    problem: FiberProblem,
    count: int,
    config: SolverConfig = DEFAULT_CONFIG,
    scheme: str = "standard",
) -> SpectrumResult:
    """Lowest ``count`` eigenvalues with Richardson error estimates."""
    problem = problem.resolved(config)
    grid = Grid.for_problem(problem, config)
    pairs = [richardson_eigenvalue(problem, k, grid, config, scheme) for k in range(count)]
    return SpectrumResult(
        eigenvalues=tuple(p[0] for p in pairs),
        error_estimates=tuple(p[1] for p in pairs),
        grid_sizes_used=(grid.n, grid.refined().n),
        problem=problem,
    )


# -- Temple ---------------------------------------------------------------------


@dataclass(frozen=True)
class TempleBound:
    """Temple enclosure of ``lambda_0 - reference_level``."""

    eta: float
    eps_sq: float
    beta: float
    lower: float
    upper: float
    valid: bool


def _apply_relative(op: DiscreteOperator, w: np.ndarray) -> np.ndarray:
    """``M^{-1} K w`` for a fitted operator, differences taken before products."""
    r = op.excess * w
    r[:-1] += op.up[:-1] * (w[:-1] - w[1:])
    r[1:] += op.low[1:] * (w[1:] - w[:-1])
    return r


def temple_bound(
    op: DiscreteOperator,
    trial: np.ndarray,
    reference_level: float,
    beta: float,
    native: bool = False,
) -> TempleBound:
    """Temple's inequality for ``lambda_0 - reference_level`` of ``op``.

    ``trial`` is sampled at ``op.nodes`` in the physical coordinate ``u``, or
    in the operator's own unknown ``w`` when ``native`` is set. The bound is
    ``eta - eps_sq/(beta - eta)`` and needs ``beta`` below the gap
    ``lambda_1 - reference_level`` and above ``eta``.
    """
    trial = np.asarray(trial, dtype=float)
    if trial.shape != op.nodes.shape:
        raise ValueError(f"trial has {trial.size} samples, operator has {op.n} unknowns")
    if not np.all(np.isfinite(trial)) or not np.any(trial):
        raise ValueError("trial state must be finite and nonzero")
    s = reference_level - op.offset
    if op.is_fitted:
        if native:
            w = trial
        else:
            with np.errstate(divide="ignore"):
                w = np.sign(trial) * np.exp(np.log(np.abs(trial) * op.jacobian) - op.log_reference)
        weights = np.exp(op.log_mass - np.max(op.log_mass))
        norm = float(np.sum(weights * w * w))
        form = float(np.sum(weights * op.excess * w * w))
        form += float(np.sum(weights[:-1] * op.up[:-1] * (w[1:] - w[:-1]) ** 2))
        eta = form / norm - s
        resid = _apply_relative(op, w) - (s + eta) * w
        eps_sq = float(np.sum(weights * resid * resid)) / norm
    else:
        y = trial * np.exp(0.5 * op.log_mass) if native else trial * op.jacobian * np.exp(0.5 * op.log_mass)
        ay = op.diag * y
        ay[:-1] += op.offdiag * y[1:]
        ay[1:] += op.offdiag * y[:-1]
        norm = float(y @ y)
        eta = float(y @ ay) / norm - s
        resid = ay - (s + eta) * y
        eps_sq = float(resid @ resid) / norm
    valid = beta > eta
    lower = eta - eps_sq / (beta - eta) if valid else -math.inf
    return TempleBound(eta=eta, eps_sq=eps_sq, beta=beta, lower=lower, upper=eta, valid=bool(valid))
