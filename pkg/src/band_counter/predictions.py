"""Closed-form leading terms: counts, momentum windows, transition radius, splittings."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .core_types import Annulus, Geometry, Strip

ROUGH_MARGIN = 2.0


class FormulaId(str, enum.Enum):
    STRIP_DN = "StripDN"
    STRIP_NN = "StripNN"
    ANNULUS_DN = "AnnulusDN"
    ANNULUS_NN = "AnnulusNN"
    HALFLINE_NEU_SPLIT = "HalflineNeuSplit"
    HALFLINE_DIR_SPLIT = "HalflineDirSplit"


@dataclass(frozen=True)
class PredictionReport:
    """``predicted_count`` is the predicted value of the formula: a count for
    the counting laws and ``mu_0 - h`` for the splitting laws. ``window`` is
    the integer-momentum interval a scan must cover."""

    geometry: Geometry
    h: float
    predicted_count: float
    window: tuple[float, float]
    transition: float | None
    formula_id: FormulaId


def _check_h(h: float) -> None:
    if not (h > 0 and math.isfinite(h)):
        raise ValueError(f"h must be positive, got {h}")


# -- strip ------------------------------------------------------------------


@dataclass(frozen=True)
class MomentumWindows:
    """Windows in ``xi = m h`` for the strip; ``rough_window`` bounds every favorable ``xi``."""

    L: float
    eps: float
    h: float
    c: float = ROUGH_MARGIN

    def __post_init__(self) -> None:
        if not 0 < self.eps < self.L / 4:
            raise ValueError(f"eps must lie in (0, L/4), got {self.eps}")
        _check_h(self.h)

    @property
    def I_eps(self) -> tuple[float, float]:
        return (-self.L + self.eps, -self.L / 2 - self.eps)

    @property
    def J_eps(self) -> tuple[float, float]:
        return (-self.L / 2 + self.eps, -self.eps)

    @property
    def rough_window(self) -> tuple[float, float]:
        s = self.c * math.sqrt(self.h)
        return (-self.L - s, s)

    def momenta(self) -> range:
        lo, hi = self.rough_window
        return range(math.ceil(lo / self.h), math.floor(hi / self.h) + 1)


def strip_rough_momenta(L: float, h: float, c: float = ROUGH_MARGIN) -> range:
    s = c * math.sqrt(h)
    return range(math.ceil((-L - s) / h), math.floor(s / h) + 1)


def strip_count(L: float, h: float, neumann_both: bool = False) -> float:
    _check_h(h)
    return L / h if neumann_both else L / (2.0 * h)


# -- annulus -----------------------------------------------------------------


def r_tilde_sq(R: float) -> float:
    """``R~^2 = (1 - R^2) / (2 |ln R|)``: the value of ``r_*^2`` where phi(1) = phi(R)."""
    if not 0 < R < 1:
        raise ValueError(f"R must lie in (0, 1), got {R}")
    return (1.0 - R * R) / (2.0 * abs(math.log(R)))


def r_tilde(R: float) -> float:
    return math.sqrt(r_tilde_sq(R))


def default_annulus_eps(R: float) -> float:
    t = r_tilde_sq(R)
    return min(0.1, 0.5 * min(1.0 - t, t - R * R))


@dataclass(frozen=True)
class AnnulusPrediction:
    R: float

    def __post_init__(self) -> None:
        if not 0 < self.R < 1:
            raise ValueError(f"R must lie in (0, 1), got {self.R}")

    @property
    def R_tilde(self) -> float:
        return r_tilde(self.R)

    def predicted_count(self, h: float) -> float:
        _check_h(h)
        R = self.R
        return 1.0 / (2.0 * h) - (1.0 - R * R) / (4.0 * h * abs(math.log(R)))

    def neumann_count(self, h: float) -> float:
        """``|A_R| / (2 pi h)``: the leading term with Neumann on both circles."""
        _check_h(h)
        return (1.0 - self.R**2) / (2.0 * h)

    def transition(self, h: float) -> float:
        """Momentum where ``r_*^2 = 2 m h`` equals ``R~^2``."""
        return r_tilde_sq(self.R) / (2.0 * h)

    def window_I(self, h: float, eps: float) -> tuple[float, float]:
        """Favorable momenta: ``R~^2 + eps < 2 m h < 1 - eps``."""
        return ((r_tilde_sq(self.R) + eps) / (2.0 * h), (1.0 - eps) / (2.0 * h))

    def window_J(self, h: float, eps: float) -> tuple[float, float]:
        """Unfavorable momenta: ``R^2 + eps < 2 m h < R~^2 - eps``."""
        return ((self.R**2 + eps) / (2.0 * h), (r_tilde_sq(self.R) - eps) / (2.0 * h))

    def rough_window(self, h: float, c: float = ROUGH_MARGIN) -> tuple[float, float]:
        return (self.R**2 / (2.0 * h) - c / math.sqrt(h), 1.0 / (2.0 * h) + c / math.sqrt(h))

    def momenta(self, h: float, c: float = ROUGH_MARGIN) -> range:
        lo, hi = self.rough_window(h, c)
        return range(math.ceil(lo), math.floor(hi) + 1)


def annulus_area(radius: float) -> float:
    """``|A_rho| = pi (1 - rho^2)``, area between radius ``rho`` and 1."""
    return math.pi * (1.0 - radius**2)


# -- half-line ----------------------------------------------------------------


def splitting_law(kind: str, xi: float, h: float, coefficient: float = 1.0) -> float:
    """``mu_0 - h`` leading term ``-+ c pi^{-1/2} h (|xi|/sqrt h) exp(-xi^2/h)``.

    Negative for the Neumann half-line, positive for Dirichlet; ``coefficient``
    multiplies the stated law.
    """
    _check_h(h)
    kind = kind.lower()
    if kind not in ("neu", "dir"):
        raise ValueError(f"kind must be 'neu' or 'dir', got {kind!r}")
    sign = -1.0 if kind == "neu" else 1.0
    ratio = abs(xi) / math.sqrt(h)
    return sign * coefficient * h * ratio * math.exp(-xi * xi / h) / math.sqrt(math.pi)


# -- dispatcher ---------------------------------------------------------------------


def predict(formula_id: FormulaId | str, geometry: Geometry, h: float, xi: float | None = None) -> PredictionReport:
    formula_id = FormulaId(formula_id)
    _check_h(h)
    if formula_id in (FormulaId.STRIP_DN, FormulaId.STRIP_NN):
        if not isinstance(geometry, Strip):
            raise ValueError(f"{formula_id.value} needs a strip geometry")
        rng = strip_rough_momenta(geometry.L, h)
        value = strip_count(geometry.L, h, formula_id is FormulaId.STRIP_NN)
        return PredictionReport(geometry, h, value, (rng.start, rng.stop - 1), None, formula_id)
    if formula_id in (FormulaId.ANNULUS_DN, FormulaId.ANNULUS_NN):
        if not isinstance(geometry, Annulus):
            raise ValueError(f"{formula_id.value} needs an annulus geometry")
        ap = AnnulusPrediction(geometry.R)
        value = ap.predicted_count(h) if formula_id is FormulaId.ANNULUS_DN else ap.neumann_count(h)
        transition = ap.transition(h) if formula_id is FormulaId.ANNULUS_DN else None
        return PredictionReport(geometry, h, value, ap.rough_window(h), transition, formula_id)
    if xi is None:
        raise ValueError("splitting laws need xi")
    if xi >= 0:
        raise ValueError("splitting laws hold for xi < 0")
    kind = "neu" if formula_id is FormulaId.HALFLINE_NEU_SPLIT else "dir"
    value = splitting_law(kind, xi, h)
    return PredictionReport(geometry, h, value, (xi / h, xi / h), None, formula_id)
