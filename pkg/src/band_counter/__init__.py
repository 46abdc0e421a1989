"""Band functions and eigenvalue counts below the lowest Landau level for
magnetic fiber operators on a strip and an annulus."""

from .core_types import (
    BC,
    Annulus,
    BoundaryPair,
    CountResult,
    FiberProblem,
    Grid,
    PotentialKind,
    SolverConfig,
    SpectrumResult,
    Strip,
    Variant,
    Weight,
    make_fiber_problem,
)

__all__ = [
    "BC",
    "Annulus",
    "BoundaryPair",
    "CountResult",
    "FiberProblem",
    "Grid",
    "PotentialKind",
    "SolverConfig",
    "SpectrumResult",
    "Strip",
    "Variant",
    "Weight",
    "make_fiber_problem",
]

__version__ = "0.1.0"
