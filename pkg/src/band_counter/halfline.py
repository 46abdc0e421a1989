"""Half-line oscillators ``-h^2 d^2/dt^2 + (t + xi)^2`` on ``(0, inf)`` and their splittings."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_types import DEFAULT_CONFIG, FiberProblem, PotentialKind, SolverConfig, Strip, Variant, make_fiber_problem
from .predictions import splitting_law
from .tridiag import discretize, ground_state, ground_state_weights, richardson_eigenvalue

SPLITTING_FLOOR = 1e-10
_EPS = np.finfo(float).eps


class AsymptoticFloorError(ValueError):
    """The predicted splitting is too small to be meaningful in double precision."""


@dataclass(frozen=True)
class HalflineResult:
    kind: str
    xi: float
    h: float
    mu0: float
    splitting: float
    predicted_splitting: float
    relative_error: float
    error_estimate: float

    @property
    def ratio(self) -> float:
        """``xi / sqrt(h)``."""
        return self.xi / math.sqrt(self.h)

    @property
    def ratio_to_predicted(self) -> float:
        return self.splitting / self.predicted_splitting


def _variant(kind: str) -> Variant:
    kind = kind.lower()
    if kind == "neu":
        return Variant.HALFLINE_NEU
    if kind == "dir":
        return Variant.HALFLINE_DIR
    raise ValueError(f"kind must be 'neu' or 'dir', got {kind!r}")


def halfline_problem(kind: str, xi: float, h: float) -> FiberProblem:
    """Half-line fiber with ``m = xi / h`` (``xi`` need not be a multiple of ``h``)."""
    variant = _variant(kind)
    return make_fiber_problem(Strip(1.0), xi / h, h, variant)


def mu0(
    kind: str,
    xi: float,
    h: float,
    config: SolverConfig = DEFAULT_CONFIG,
    floor: float = 100 * _EPS,
    scheme: str = "fitted",
) -> HalflineResult:
    """Ground level of the Neumann (``"neu"``) or Dirichlet (``"dir"``) half-line oscillator.

    The splitting ``mu0 - h`` comes from the fitted scheme, which resolves it
    to relative accuracy even when it is many orders below ``h``.
    """
    if not xi < 0:
        raise ValueError("the localized regime needs xi < 0")
    predicted = splitting_law(kind, xi, h)
    if abs(predicted) < floor * h:
        raise AsymptoticFloorError(
            f"predicted splitting {predicted:.3g} is below the numeric floor {floor * h:.3g}"
        )
    problem = halfline_problem(kind, xi, h)
    split, err = richardson_eigenvalue(problem, 0, None, config, scheme, relative=True)
    if scheme == "standard":
        split -= h
    return HalflineResult(
        kind=kind.lower(),
        xi=xi,
        h=h,
        mu0=h + split,
        splitting=split,
        predicted_splitting=predicted,
        relative_error=abs(split - predicted) / abs(predicted),
        error_estimate=err,
    )


def splitting_sweep(
    kind: str,
    ratios,
    h: float,
    config: SolverConfig = DEFAULT_CONFIG,
    floor: float = SPLITTING_FLOOR,
) -> list[HalflineResult]:
    """``mu0`` along ``xi = ratio * sqrt(h)``; stops before the numeric floor."""
    out = []
    for r in ratios:
        if r > -2:
            raise ValueError(f"sweep ratios must be <= -2, got {r}")
        xi = r * math.sqrt(h)
        if abs(splitting_law(kind, xi, h)) < floor * h:
            break
        out.append(mu0(kind, xi, h, config, floor))
    return out


def agmon_exponent(problem: FiberProblem, t: np.ndarray) -> np.ndarray:
    """``Phi`` in the weight ``exp(alpha Phi / h)``: ``(t + xi)^2`` flat, ``(phi - phi(r_*))/2`` radial."""
    if problem.potential is PotentialKind.ANNULUS_RADIAL:
        rs2 = 2.0 * problem.m * problem.h
        phi = t * t - rs2 * np.log(t)
        phi_star = rs2 - rs2 * np.log(math.sqrt(rs2)) if rs2 > 0 else 0.0
        return 0.5 * (phi - phi_star)
    return (t + problem.xi) ** 2


def decay_certificate(
    problem: FiberProblem,
    alpha: float,
    config: SolverConfig = DEFAULT_CONFIG,
    with_constant: bool = False,
):
    """Weighted over unweighted norm of the ground state, weight ``exp(alpha (Phi - Phi_min)/h)``.

    With ``with_constant`` also returns ``alpha Phi_min / h``, the log of the
    factor removed by the shift.
    """
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    scheme = "fitted" if problem.has_reference_solution else "standard"
    op = discretize(problem, None, config, scheme)
    u = ground_state(op)
    q = ground_state_weights(op) * u * u
    phi = agmon_exponent(op.problem, op.nodes)
    phi_min = float(phi.min())
    ratio = float(np.sum(q * np.exp(alpha * (phi - phi_min) / problem.h)) / np.sum(q))
    if with_constant:
        return ratio, alpha * phi_min / problem.h
    return ratio
