"""Shared vocabulary: geometries, boundary conditions, fiber problems, grids, results.

All lengths and energies are nondimensional. A fiber problem describes the 1D
operator ``-h^2 u'' + V u`` on an interval, where ``V`` is one of a few
parametrised potentials. Radially weighted problems (inner product ``r dr``)
are handed to the solvers through the Liouville substitution ``w = sqrt(r) u``,
so every solver works with a flat measure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import numpy as np

SCHEMA_VERSION = 1


class BC(str, enum.Enum):
    DIRICHLET = "D"
    NEUMANN = "N"


@dataclass(frozen=True)
class BoundaryPair:
    left: BC
    right: BC

    @classmethod
    def parse(cls, code: str) -> "BoundaryPair":
        """``"dn"`` -> (Dirichlet, Neumann), case-insensitive."""
        code = code.strip().upper()
        if len(code) != 2 or any(c not in "DN" for c in code):
            raise ValueError(f"boundary code must be two letters from D/N, got {code!r}")
        return cls(BC(code[0]), BC(code[1]))

    @property
    def code(self) -> str:
        return self.left.value + self.right.value


class PotentialKind(str, enum.Enum):
    STRIP_HARMONIC = "StripHarmonic"
    ANNULUS_RADIAL = "AnnulusRadial"
    HALFLINE_HARMONIC = "HalflineHarmonic"
    CUSTOM = "Custom"


class Weight(str, enum.Enum):
    FLAT = "Flat"
    RADIAL = "Radial"


class Variant(str, enum.Enum):
    MIXED_DN = "MixedDN"
    PURE_NN = "PureNN"
    HALFLINE_NEU = "HalflineNeu"
    HALFLINE_DIR = "HalflineDir"
    FULL_LINE = "FullLine"


@dataclass(frozen=True)
class Strip:
    """Cross-section ``(0, L)`` of the cylinder ``S^1 x (0, L)``."""

    L: float

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ValueError(f"strip length must be positive, got {self.L}")


@dataclass(frozen=True)
class Annulus:
    """``{R < |x| < 1}``; the outer radius is fixed at 1."""

    R: float

    def __post_init__(self) -> None:
        if not 0 < self.R < 1:
            raise ValueError(f"inner radius must lie in (0, 1), got {self.R}")


Geometry = Strip | Annulus


def geometry_to_record(geometry: Geometry) -> dict[str, Any]:
    if isinstance(geometry, Strip):
        return {"kind": "Strip", "L": geometry.L}
    return {"kind": "Annulus", "R": geometry.R}


def geometry_from_record(rec: Mapping[str, Any]) -> Geometry:
    kind = rec["kind"]
    if kind == "Strip":
        return Strip(float(rec["L"]))
    if kind == "Annulus":
        return Annulus(float(rec["R"]))
    raise ValueError(f"unknown geometry kind {kind!r}")


@dataclass(frozen=True)
class SolverConfig:
    """Numerical knobs shared by every solve.

    ``resolution`` sets the working grid spacing ``sqrt(h)/resolution``;
    ``min_resolution`` is the coarsest spacing ``discretize`` accepts.
    ``truncation`` is the distance, in units of ``sqrt(h)``, kept beyond the
    turning points when an unbounded problem is cut to a finite interval.
    """

    resolution: float = 16.0
    min_resolution: float = 8.0
    truncation: float = 12.0
    rtol: float = 1e-12

    def __post_init__(self) -> None:
        if self.min_resolution <= 0 or self.resolution < self.min_resolution:
            raise ValueError("resolution must be >= min_resolution > 0")
        if self.truncation <= 0:
            raise ValueError("truncation must be positive")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class FiberProblem:
    """One fiber operator ``-h^2 d^2/dt^2 + V`` with endpoint conditions.

    ``m`` is the Fourier mode; ``xi = m*h`` is derived, never stored. For
    half-line and full-line problems ``m`` may be any real (``xi`` is then a
    free parameter); ``interval`` may contain infinite endpoints, in which case
    ``truncated`` names the cut performed by :meth:`resolved`.
    """

    interval: tuple[float, float]
    h: float
    m: float
    potential: PotentialKind
    weight: Weight
    bc: BoundaryPair
    truncated: str | None = None
    samples: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self) -> None:
        a, b = self.interval
        if not self.h > 0 or not math.isfinite(self.h):
            raise ValueError(f"h must be positive, got {self.h}")
        if not a < b:
            raise ValueError(f"interval must satisfy a < b, got {self.interval}")
        if self.truncated is None and not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("infinite interval requires a truncation marker")
        if self.truncated not in (None, "line", "halfline"):
            raise ValueError(f"unknown truncation marker {self.truncated!r}")
        if self.potential is PotentialKind.ANNULUS_RADIAL and not a > 0:
            raise ValueError("radial potential needs an interval inside (0, inf)")
        if self.weight is Weight.RADIAL and not a > 0:
            raise ValueError("radial weight needs an interval inside (0, inf)")
        if self.potential is PotentialKind.CUSTOM:
            if self.samples is None or len(self.samples[0]) < 2:
                raise ValueError("custom potential needs at least two samples")
            if len(self.samples[0]) != len(self.samples[1]):
                raise ValueError("custom samples: x and v lengths differ")

    @property
    def xi(self) -> float:
        return self.m * self.h

    @property
    def is_finite(self) -> bool:
        return self.truncated is None

    # -- potentials --------------------------------------------------------

    def potential_values(self, t: np.ndarray) -> np.ndarray:
        """The potential of the original operator (``(mh/r - r/2)^2`` for radial)."""
        t = np.asarray(t, dtype=float)
        kind = self.potential
        if kind in (PotentialKind.STRIP_HARMONIC, PotentialKind.HALFLINE_HARMONIC):
            return (t + self.m * self.h) ** 2
        if kind is PotentialKind.ANNULUS_RADIAL:
            return (self.m * self.h / t - t / 2.0) ** 2
        x, v = self.samples  # type: ignore[misc]
        return np.interp(t, x, v)

    def flat_potential(self, t: np.ndarray) -> np.ndarray:
        """Potential seen by the flat-measure operator after the Liouville map."""
        v = self.potential_values(t)
        if self.weight is Weight.RADIAL:
            t = np.asarray(t, dtype=float)
            v = v - self.h**2 / (4.0 * t * t)
        return v

    def robin(self, x: float) -> float:
        """``kappa`` in ``w' = kappa w`` imposed at a Neumann end, flat coordinates."""
        return 1.0 / (2.0 * x) if self.weight is Weight.RADIAL else 0.0

    def jacobian(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.sqrt(t) if self.weight is Weight.RADIAL else np.ones_like(t)

    @property
    def has_reference_solution(self) -> bool:
        return self.potential is not PotentialKind.CUSTOM

    @property
    def reference_level(self) -> float:
        """Energy at which a positive closed-form solution is known (the Landau level)."""
        return self.h

    def reference_log(self, t: np.ndarray) -> np.ndarray:
        """``log g`` for the positive solution ``g`` of the flat equation at level h."""
        t = np.asarray(t, dtype=float)
        kind = self.potential
        if kind in (PotentialKind.STRIP_HARMONIC, PotentialKind.HALFLINE_HARMONIC):
            return -((t + self.xi) ** 2) / (2.0 * self.h)
        if kind is PotentialKind.ANNULUS_RADIAL:
            # sqrt(r) * r^m * exp(-r^2/4h)
            return (self.m + 0.5) * np.log(t) - t * t / (4.0 * self.h)
        raise ValueError("custom potentials have no closed-form reference solution")

    def reference_dlog(self, t: np.ndarray) -> np.ndarray:
        """``g'/g`` matching :meth:`reference_log`."""
        t = np.asarray(t, dtype=float)
        kind = self.potential
        if kind in (PotentialKind.STRIP_HARMONIC, PotentialKind.HALFLINE_HARMONIC):
            return -(t + self.xi) / self.h
        if kind is PotentialKind.ANNULUS_RADIAL:
            return (self.m + 0.5) / t - t / (2.0 * self.h)
        raise ValueError("custom potentials have no closed-form reference solution")

    # -- truncation ----------------------------------------------------------

    def resolved(self, config: SolverConfig = DEFAULT_CONFIG) -> "FiberProblem":
        """Cut an unbounded problem to a finite interval with Dirichlet far ends."""
        if self.truncated is None:
            return self
        a, b = self.interval
        reach = (1.0 + config.truncation) * math.sqrt(self.h)
        center = -self.xi
        if self.truncated == "line":
            interval = (center - reach, center + reach)
            bc = BoundaryPair(BC.DIRICHLET, BC.DIRICHLET)
        else:
            interval = (a, max(center, a) + reach)
            bc = BoundaryPair(self.bc.left, BC.DIRICHLET)
        return replace(self, interval=interval, bc=bc, truncated=None)

    # -- records ---------------------------------------------------------------

    def to_record(self) -> dict[str, Any]:
        a, b = self.interval
        rec: dict[str, Any] = {
            "interval": [a if math.isfinite(a) else None, b if math.isfinite(b) else None],
            "h": self.h,
            "m": self.m,
            "potential": self.potential.value,
            "weight": self.weight.value,
            "bc": self.bc.code,
            "truncated": self.truncated,
        }
        if self.samples is not None:
            rec["samples"] = [list(self.samples[0]), list(self.samples[1])]
        return rec

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "FiberProblem":
        a, b = rec["interval"]
        samples = rec.get("samples")
        return cls(
            interval=(-math.inf if a is None else float(a), math.inf if b is None else float(b)),
            h=float(rec["h"]),
            m=float(rec["m"]),
            potential=PotentialKind(rec["potential"]),
            weight=Weight(rec["weight"]),
            bc=BoundaryPair.parse(rec["bc"]),
            truncated=rec.get("truncated"),
            samples=None if samples is None else (tuple(samples[0]), tuple(samples[1])),
        )


def custom_problem(
    interval: tuple[float, float],
    h: float,
    bc: BoundaryPair | str,
    x: np.ndarray | None = None,
    v: np.ndarray | None = None,
) -> FiberProblem:
    """Test fixture: a sampled potential (zero when no samples are given)."""
    a, b = interval
    if x is None:
        x, v = np.array([a, b]), np.zeros(2)
    if isinstance(bc, str):
        bc = BoundaryPair.parse(bc)
    samples = (tuple(float(s) for s in x), tuple(float(s) for s in v))  # type: ignore[union-attr]
    return FiberProblem((a, b), h, 0.0, PotentialKind.CUSTOM, Weight.FLAT, bc, samples=samples)


def make_fiber_problem(
    geometry: Geometry,
    m: float,
    h: float,
    variant: Variant | str,
    reverse: bool = False,
) -> FiberProblem:
    """Build the fiber operator for mode ``m`` of ``geometry``.

    ``MixedDN`` puts Dirichlet on the inner/lower boundary (``t = 0`` or
    ``r = R``) and Neumann on the other; ``reverse`` swaps the two.
    """
    variant = Variant(variant)
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    D, N = BC.DIRICHLET, BC.NEUMANN
    if variant in (Variant.MIXED_DN, Variant.PURE_NN):
        if float(m) != round(float(m)):
            raise ValueError(f"angular momentum must be an integer, got {m}")
        if variant is Variant.MIXED_DN:
            bc = BoundaryPair(N, D) if reverse else BoundaryPair(D, N)
        else:
            bc = BoundaryPair(N, N)
        if isinstance(geometry, Strip):
            return FiberProblem((0.0, geometry.L), h, float(m), PotentialKind.STRIP_HARMONIC, Weight.FLAT, bc)
        return FiberProblem((geometry.R, 1.0), h, float(m), PotentialKind.ANNULUS_RADIAL, Weight.RADIAL, bc)
    if not isinstance(geometry, Strip):
        raise ValueError(f"variant {variant.value} is defined for flat (strip) geometry only")
    if reverse:
        raise ValueError("reverse applies to two-boundary variants only")
    if variant is Variant.FULL_LINE:
        return FiberProblem(
            (-math.inf, math.inf), h, float(m), PotentialKind.STRIP_HARMONIC, Weight.FLAT,
            BoundaryPair(D, D), truncated="line",
        )
    left = N if variant is Variant.HALFLINE_NEU else D
    return FiberProblem(
        (0.0, math.inf), h, float(m), PotentialKind.HALFLINE_HARMONIC, Weight.FLAT,
        BoundaryPair(left, D), truncated="halfline",
    )


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[a, b]`` with ``n`` interior vertices.

    Refinement halves the spacing (``n -> 2n + 1``), which is what Richardson
    extrapolation needs. Neumann ends add their boundary vertex as an unknown.
    """

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError(f"grid needs at least 3 interior nodes, got {self.n}")
        if not self.b > self.a:
            raise ValueError("grid interval must have positive length")

    @property
    def cells(self) -> int:
        return self.n + 1

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / (self.n + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.spacing * np.arange(1, self.n + 1)

    def vertices(self) -> np.ndarray:
        return self.a + self.spacing * np.arange(0, self.n + 2)

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.a, self.b, factor * (self.n + 1) - 1)

    @classmethod
    def for_problem(cls, problem: FiberProblem, config: SolverConfig = DEFAULT_CONFIG) -> "Grid":
        problem = problem.resolved(config)
        a, b = problem.interval
        target = math.sqrt(problem.h) / config.resolution
        # guard against roundoff pushing an exact multiple up by one cell
        cells = max(4, math.ceil((b - a) / target * (1.0 - 1e-12)))
        return cls(a, b, cells - 1)


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: tuple[float, ...]
    error_estimates: tuple[float, ...]
    grid_sizes_used: tuple[int, ...]
    problem: FiberProblem


@dataclass
class CountResult:
    """A counting experiment over a window of angular momenta.

    ``shifts`` holds ``lambda_0 - h`` computed directly (it survives where
    ``lambda_0`` itself rounds to ``h``); ``excited_values`` holds ``lambda_1``.
    """

    h: float
    geometry: Geometry
    variant: str
    m_window: tuple[int, int]
    ground_values: dict[int, float]
    shifts: dict[int, float]
    excited_values: dict[int, float]
    below: dict[int, bool]
    count: int
    predicted: float
    ratio: float
    ambiguous_m: tuple[int, ...] = field(default_factory=tuple)

    def to_record(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "h": self.h,
            "geometry": geometry_to_record(self.geometry),
            "variant": self.variant,
            "m_window": list(self.m_window),
            "count": self.count,
            "predicted": self.predicted,
            "ratio": self.ratio,
            "ambiguous_m": list(self.ambiguous_m),
            "rows": [
                [m, self.ground_values[m], self.shifts[m], self.excited_values[m], bool(self.below[m])]
                for m in sorted(self.ground_values)
            ],
        }

    @classmethod
    def from_record(cls, rec: Mapping[str, Any]) -> "CountResult":
        rows = rec.get("rows", [])
        return cls(
            h=float(rec["h"]),
            geometry=geometry_from_record(rec["geometry"]),
            variant=str(rec["variant"]),
            m_window=(int(rec["m_window"][0]), int(rec["m_window"][1])),
            ground_values={int(r[0]): float(r[1]) for r in rows},
            shifts={int(r[0]): float(r[2]) for r in rows},
            excited_values={int(r[0]): float(r[3]) for r in rows},
            below={int(r[0]): bool(r[4]) for r in rows},
            count=int(rec["count"]),
            predicted=float(rec["predicted"]),
            ratio=float(rec["ratio"]),
            ambiguous_m=tuple(int(m) for m in rec["ambiguous_m"]),
        )
