"""Per-momentum fiber solves, optionally spread over worker processes."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable

from .core_types import DEFAULT_CONFIG, Geometry, Grid, SolverConfig, Variant, make_fiber_problem
from .tridiag import discretize, relative_eigenvalue


UNDERFLOW = 1e-280


@dataclass(frozen=True)
class FiberRecord:
    """Ground and first excited levels of one fiber, as shifts ``lambda - h``.

    ``shift0``/``shift1`` are Richardson values, ``err0``/``err1`` their error
    estimates, ``coarse0``/``fine0`` the raw grid values behind ``shift0``.
    """

    m: int
    h: float
    shift0: float
    err0: float
    shift1: float
    err1: float
    coarse0: float
    fine0: float

    @property
    def lambda0(self) -> float:
        return self.h + self.shift0

    @property
    def lambda1(self) -> float:
        return self.h + self.shift1

    def ambiguous(self, safety: float = 3.0) -> bool:
        """Sign of ``lambda_0 - h`` not settled by the discretization.

        The band is the shift's own error estimate (times ``safety``), plus
        any disagreement in sign between the two grids and the extrapolation.
        """
        s = self.shift0
        if abs(s) <= max(safety * self.err0, UNDERFLOW):
            return True
        return (self.coarse0 < 0) != (self.fine0 < 0) or (self.fine0 < 0) != (s < 0)

    def excited_ambiguous(self, safety: float = 3.0) -> bool:
        return abs(self.shift1) <= max(safety * self.err1, UNDERFLOW)


def solve_fiber(
    geometry: Geometry,
    m: int,
    h: float,
    variant: Variant | str,
    config: SolverConfig = DEFAULT_CONFIG,
    reverse: bool = False,
) -> FiberRecord:
    problem = make_fiber_problem(geometry, m, h, variant, reverse=reverse)
    grid = Grid.for_problem(problem, config)
    coarse = discretize(problem, grid, config, "fitted")
    fine = discretize(problem, grid.refined(), config, "fitted")
    c0, f0 = relative_eigenvalue(coarse, 0, config.rtol), relative_eigenvalue(fine, 0, config.rtol)
    c1, f1 = relative_eigenvalue(coarse, 1, config.rtol), relative_eigenvalue(fine, 1, config.rtol)
    return FiberRecord(
        m=int(m),
        h=h,
        shift0=(4.0 * f0 - c0) / 3.0,
        err0=abs(f0 - c0) / 3.0,
        shift1=(4.0 * f1 - c1) / 3.0,
        err1=abs(f1 - c1) / 3.0,
        coarse0=c0,
        fine0=f0,
    )


def _solve_args(args):
    return solve_fiber(*args)


def default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover
        return os.cpu_count() or 1


def scan_fibers(
    geometry: Geometry,
    momenta: Iterable[int],
    h: float,
    variant: Variant | str,
    config: SolverConfig = DEFAULT_CONFIG,
    jobs: int | None = 1,
    reverse: bool = False,
) -> dict[int, FiberRecord]:
    """Solve every fiber in ``momenta``; results keyed and sorted by ``m``."""
    ms = sorted(int(m) for m in momenta)
    args = [(geometry, m, h, variant, config, reverse) for m in ms]
    jobs = default_jobs() if jobs is None else jobs
    if jobs <= 1 or len(ms) < 16:
        recs = [_solve_args(a) for a in args]
    else:
        chunk = max(1, len(args) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            recs = list(pool.map(_solve_args, args, chunksize=chunk))
    return {r.m: r for r in sorted(recs, key=lambda r: r.m)}
