"""Fibers ``-h^2 d^2/dt^2 + (t + m h)^2`` on ``(0, L)``: band functions and the count below h."""

from __future__ import annotations

import enum
import math
from dataclasses import replace

import numpy as np

from .core_types import DEFAULT_CONFIG, CountResult, SolverConfig, Strip, Variant, make_fiber_problem
from .predictions import MomentumWindows, strip_count, strip_rough_momenta
from .scan import FiberRecord, scan_fibers
from .tridiag import richardson_eigenvalue

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _with_rtol(config: SolverConfig, tol: float) -> SolverConfig:
    return config if tol == config.rtol else replace(config, rtol=tol)


class Label(str, enum.Enum):
    FAVORABLE = "Favorable"
    UNFAVORABLE = "Unfavorable"
    BOUNDARY = "Boundary"


def _two_boundary(variant: Variant | str) -> Variant:
    variant = Variant(variant)
    if variant not in (Variant.MIXED_DN, Variant.PURE_NN):
        raise ValueError(f"strip fibers use MixedDN or PureNN, got {variant.value}")
    return variant


def band0_shift(
    L: float, m: int, h: float, variant: Variant | str = Variant.MIXED_DN, config: SolverConfig = DEFAULT_CONFIG
) -> tuple[float, float]:
    """``(lambda_0 - h, error estimate)``, resolved even when far below the grid error."""
    problem = make_fiber_problem(Strip(L), m, h, _two_boundary(variant))
    return richardson_eigenvalue(problem, 0, None, config, "fitted", relative=True)


def band0(L: float, m: int, h: float, variant: Variant | str = Variant.MIXED_DN, config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Ground band ``lambda_0`` of the strip fiber with momentum ``m``."""
    return h + band0_shift(L, m, h, variant, config)[0]


def second_band_floor(
    L: float, m: int, h: float, variant: Variant | str = Variant.MIXED_DN, config: SolverConfig = DEFAULT_CONFIG
) -> float:
    """``lambda_1`` of the strip fiber; it stays above ``h`` for every ``m``."""
    problem = make_fiber_problem(Strip(L), m, h, _two_boundary(variant))
    return h + richardson_eigenvalue(problem, 1, None, config, "fitted", relative=True)[0]


def count_from_records(
    records: dict[int, FiberRecord],
    h: float,
    geometry,
    variant: Variant,
    predicted: float,
) -> CountResult:
    below = {}
    ambiguous = []
    for m, rec in records.items():
        if rec.ambiguous():
            ambiguous.append(m)
            below[m] = False
        else:
            below[m] = rec.shift0 < 0
    count = sum(below.values())
    ms = sorted(records)
    return CountResult(
        h=h,
        geometry=geometry,
        variant=variant.value,
        m_window=(ms[0], ms[-1]),
        ground_values={m: records[m].lambda0 for m in ms},
        shifts={m: records[m].shift0 for m in ms},
        excited_values={m: records[m].lambda1 for m in ms},
        below=below,
        count=count,
        predicted=predicted,
        ratio=count / predicted,
        ambiguous_m=tuple(ambiguous),
    )


def count_strip(
    L: float,
    h: float,
    variant: Variant | str = Variant.MIXED_DN,
    tol: float = 1e-12,
    config: SolverConfig = DEFAULT_CONFIG,
    jobs: int | None = 1,
    reverse: bool = False,
) -> CountResult:
    """Count momenta with ``lambda_0 < h`` over the rough window (margin 2)."""
    variant = _two_boundary(variant)
    config = _with_rtol(config, tol)
    momenta = strip_rough_momenta(L, h)
    if len(momenta) < 10:
        raise ValueError(f"rough window holds only {len(momenta)} momenta; decrease h")
    records = scan_fibers(Strip(L), momenta, h, variant, config, jobs, reverse)
    predicted = strip_count(L, h, variant is Variant.PURE_NN)
    return count_from_records(records, h, Strip(L), variant, predicted)


def classify_momenta(
    L: float,
    h: float,
    eps: float,
    config: SolverConfig = DEFAULT_CONFIG,
    jobs: int | None = 1,
) -> dict[int, Label]:
    """Label every momentum of the rough window by the sign of ``lambda_0 - h``."""
    windows = MomentumWindows(L, eps, h)
    records = scan_fibers(Strip(L), windows.momenta(), h, Variant.MIXED_DN, config, jobs)
    labels = {}
    for m, rec in records.items():
        if rec.ambiguous():
            labels[m] = Label.BOUNDARY
        else:
            labels[m] = Label.FAVORABLE if rec.shift0 < 0 else Label.UNFAVORABLE
    return labels


def misclassified(L: float, h: float, eps: float, labels: dict[int, Label]) -> list[int]:
    """Momenta inside the windows whose label contradicts the window."""
    w = MomentumWindows(L, eps, h)
    bad = []
    for m, lab in labels.items():
        xi = m * h
        if w.I_eps[0] <= xi <= w.I_eps[1] and lab is not Label.FAVORABLE:
            bad.append(m)
        elif w.J_eps[0] <= xi <= w.J_eps[1] and lab is not Label.UNFAVORABLE:
            bad.append(m)
    return bad


def hermite_state(n: int, xi: float, h: float, t):
    """Normalized Hermite function ``c_n H_n((t+xi)/sqrt h) exp(-(t+xi)^2/2h)``."""
    if not 0 <= n <= 30:
        raise ValueError(f"Hermite index must lie in [0, 30], got {n}")
    z = (np.asarray(t, dtype=float) + xi) / math.sqrt(h)
    h_prev = np.ones_like(z)
    h_cur = 2.0 * z if n >= 1 else h_prev
    for k in range(1, n):
        h_prev, h_cur = h_cur, 2.0 * z * h_cur - 2.0 * k * h_prev
    if n == 0:
        h_cur = h_prev
    c = (2.0**n * math.factorial(n) * math.sqrt(math.pi * h)) ** -0.5
    out = c * h_cur * np.exp(-0.5 * z * z)
    return float(out) if np.ndim(out) == 0 else out


def smoothstep(x):
    """C^2 ramp: 0 for ``x <= 0``, 1 for ``x >= 1``; returns value and derivative."""
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x), 30.0 * x * x * (1.0 - x) ** 2


def _gauss_nodes(a: float, b: float, cells: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(a, b, cells + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    t = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return t, w


def strip_boundary_term(L: float, xi: float, h: float, step: float | None = None) -> float:
    """``f_0'(L) f_0(L)`` with the derivative taken by a central difference."""
    step = math.sqrt(h) / 64 if step is None else step
    f = hermite_state(0, xi, h, L)
    df = (hermite_state(0, xi, h, L + step) - hermite_state(0, xi, h, L - step)) / (2 * step)
    return f * df


def quasimode_rayleigh_strip(L: float, m: int, h: float, eps: float, cells: int | None = None) -> float:
    """Rayleigh quotient minus ``h`` of the cut-off Gaussian ``chi f_0``.

    ``chi`` vanishes on ``[0, eps/2]`` and equals 1 on ``[eps, L]``. The form
    is integrated by Gauss-Legendre quadrature of the continuous functions.
    """
    windows = MomentumWindows(L, eps, h)
    xi = m * h
    lo, hi = windows.I_eps
    if not lo < xi < hi:
        raise ValueError(f"m h = {xi} lies outside the favorable window ({lo}, {hi})")
    if cells is None:
        cells = max(256, math.ceil(16 * L / math.sqrt(h)))
    t, w = _gauss_nodes(0.0, L, cells)
    chi, dchi = smoothstep((t - eps / 2) / (eps / 2))
    dchi = dchi / (eps / 2)
    f = hermite_state(0, xi, h, t)
    df = -(t + xi) / h * f
    u = chi * f
    du = dchi * f + chi * df
    norm = np.sum(w * u * u)
    form = np.sum(w * (h * h * du * du + ((t + xi) ** 2 - h) * u * u))
    return float(form / norm)
