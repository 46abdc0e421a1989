"""Cross-checks between the Sturm counts and Pruefer shooting on random fibers."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core_types import (
    DEFAULT_CONFIG,
    Annulus,
    BoundaryPair,
    FiberProblem,
    Grid,
    SolverConfig,
    Strip,
    Variant,
    make_fiber_problem,
)
from .predictions import AnnulusPrediction, strip_rough_momenta
from .shooting import default_steps, shoot_count, shoot_eigenvalue
from .tridiag import count_below, discretize, eigenvalue, richardson_eigenvalue

BC_CODES = ("DD", "DN", "ND", "NN")


@dataclass(frozen=True)
class OracleCase:
    index: int
    problem: FiberProblem
    threshold: float
    sturm: int
    shoot: int
    ambiguous: bool

    @property
    def agree(self) -> bool:
        return self.sturm == self.shoot


def random_problem(rng: np.random.Generator) -> FiberProblem:
    """A strip or annulus fiber with random ``h``, boundary pair and ``m`` in the rough window."""
    h = float(10.0 ** rng.uniform(-2.0, 0.0))
    code = BC_CODES[int(rng.integers(len(BC_CODES)))]
    if rng.random() < 0.5:
        geometry = Strip(float(rng.uniform(0.5, 1.5)))
        window = strip_rough_momenta(geometry.L, h)
    else:
        geometry = Annulus(float(rng.uniform(0.2, 0.8)))
        window = AnnulusPrediction(geometry.R).momenta(h)
    m = int(rng.integers(window.start, window.stop))
    base = make_fiber_problem(geometry, m, h, Variant.MIXED_DN)
    return replace(base, bc=BoundaryPair.parse(code))


def random_threshold(rng: np.random.Generator, h: float) -> float:
    choice = int(rng.integers(3))
    if choice == 0:
        return h
    if choice == 1:
        return 2.0 * h
    return float(h * rng.uniform(0.25, 6.0))


def ambiguity_band(problem: FiberProblem, threshold: float, config: SolverConfig = DEFAULT_CONFIG) -> tuple[int, bool]:
    """Fine-grid Sturm count and whether a nearby eigenvalue sits inside the error band."""
    grid = Grid.for_problem(problem, config)
    coarse = discretize(problem, grid, config)
    fine = discretize(problem, grid.refined(), config)
    count = count_below(fine, threshold)
    ambiguous = False
    for k in (count - 1, count):
        if 0 <= k < min(coarse.n, fine.n):
            lf = eigenvalue(fine, k)
            lc = eigenvalue(coarse, k)
            band = 2.0 * abs(lf - lc) + 1e-9 * (abs(threshold) + problem.h)
            if abs(lf - threshold) <= band:
                ambiguous = True
    return count, ambiguous


def compare_counts(index: int, problem: FiberProblem, threshold: float, config: SolverConfig = DEFAULT_CONFIG) -> OracleCase:
    sturm, ambiguous = ambiguity_band(problem, threshold, config)
    shoot = shoot_count(problem, threshold, None, config)
    return OracleCase(index, problem, threshold, sturm, shoot, ambiguous)


def oracle_sweep(count: int, seed: int, config: SolverConfig = DEFAULT_CONFIG) -> list[OracleCase]:
    rng = np.random.default_rng(seed)
    cases = []
    for i in range(count):
        problem = random_problem(rng)
        threshold = random_threshold(rng, problem.h)
        cases.append(compare_counts(i, problem, threshold, config))
    return cases


def shooting_error(problem: FiberProblem, k: int, tol: float = 1e-11, config: SolverConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """``lambda_k`` by shooting, with an error from doubling the step count."""
    top = shoot_eigenvalue(problem, k, 1e-6, None, config)
    steps = default_steps(problem, top + problem.h, config)
    a = shoot_eigenvalue(problem, k, tol, steps, config)
    b = shoot_eigenvalue(problem, k, tol, 2 * steps, config)
    return b, abs(a - b) + tol * max(abs(b), problem.h)


def ground_level_mismatch(problem: FiberProblem, config: SolverConfig = DEFAULT_CONFIG) -> tuple[float, float, float]:
    """``(|tridiagonal - shooting|, combined error, lambda_0)`` for the ground level."""
    value, err = richardson_eigenvalue(problem, 0, None, config)
    shot, serr = shooting_error(problem, 0, config=config)
    return abs(value - shot), err + serr + 10 * config.rtol * max(abs(value), problem.h), value

