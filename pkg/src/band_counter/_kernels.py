"""Compiled inner loops: Sturm sequences, pencil recurrences, Pruefer RK4."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

TINY = 1e-290

# Potential codes understood by the Pruefer integrator.
POT_SHIFTED_SQUARE = 0  # (t + xi)^2
POT_RADIAL_FLAT = 1  # (mh/r - r/2)^2 - h^2/(4 r^2)
POT_SAMPLED = 2  # piecewise linear through samples


@njit(cache=True)
def sturm_count(diag, off2, x, pivmin):
    """Number of eigenvalues strictly below ``x`` of the symmetric tridiagonal
    matrix with diagonal ``diag`` and squared off-diagonal ``off2``."""
    n = diag.shape[0]
    count = 0
    q = diag[0] - x
    if q == 0.0:
        q = pivmin
    elif abs(q) < pivmin:
        q = math.copysign(pivmin, q)
    if q < 0.0:
        count += 1
    for j in range(1, n):
        q = diag[j] - x - off2[j - 1] / q
        if q == 0.0:
            q = pivmin
        elif abs(q) < pivmin:
            q = math.copysign(pivmin, q)
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def sturm_kth(diag, off2, k, lo, hi, rtol, abstol, pivmin):
    """Bisection for the k-th eigenvalue inside the bracket ``[lo, hi]``."""
    for _ in range(4000):
        if hi - lo <= max(rtol * max(abs(lo), abs(hi)), abstol):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(diag, off2, mid, pivmin) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def pencil_count(up, low, exc, mu):
    """Eigenvalues strictly below ``mu`` for a normalized conductance pencil.

    Pivot ``j`` equals ``up[j] + tau[j]`` where
    ``tau[j] = exc[j] - mu + low[j] * tau[j-1] / (up[j-1] + tau[j-1])``.
    Keeping ``tau`` instead of the pivot avoids cancelling the large
    conductances against each other, so shifts far below their size resolve.
    """
    n = up.shape[0]
    count = 0
    tau = 0.0
    for j in range(n):
        t = exc[j] - mu
        if j > 0 and low[j] != 0.0:
            den = up[j - 1] + tau
            if den == 0.0:
                den = TINY
            if abs(tau) > abs(up[j - 1]):
                t += low[j] / (1.0 + up[j - 1] / tau)
            else:
                t += low[j] * tau / den
        piv = up[j] + t
        if piv == 0.0:
            # a zero pivot counts as nonnegative: strict inequality
            t = TINY - up[j]
            piv = TINY
        if piv < 0.0:
            count += 1
        tau = t
    return count


@njit(cache=True)
def pencil_kth(up, low, exc, k, bound, rtol):
    """k-th eigenvalue of the pencil, bisected to relative accuracy in ``mu``.

    Steps are geometric while the bracket straddles many decades so that
    exponentially small eigenvalues are found to full relative precision.
    """
    below_zero = pencil_count(up, low, exc, 0.0)
    if k < below_zero:
        lo, hi = -bound, 0.0
    else:
        lo, hi = 0.0, bound
    for _ in range(6000):
        if hi - lo <= rtol * max(abs(lo), abs(hi)) or hi - lo < 1e-300:
            break
        if lo > 0.0 and hi > 2.0 * lo:
            mid = math.sqrt(lo * hi)
        elif hi < 0.0 and lo < 2.0 * hi:
            mid = -math.sqrt(lo * hi)
        elif lo == 0.0:
            mid = hi * 1e-3 if hi > 1e-250 else 0.5 * hi
        elif hi == 0.0:
            mid = lo * 1e-3 if lo < -1e-250 else 0.5 * lo
        else:
            mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pencil_count(up, low, exc, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def _potential(t, code, p0, p1, xs, vs):
    if code == POT_SHIFTED_SQUARE:
        return (t + p0) ** 2
    if code == POT_RADIAL_FLAT:
        # p0 = m*h, p1 = h
        return (p0 / t - 0.5 * t) ** 2 - p1 * p1 / (4.0 * t * t)
    return np.interp(t, xs, vs)


@njit(cache=True)
def _phase_rate(t, theta, energy, scale, p, code, p0, p1, xs, vs):
    c = math.cos(theta)
    s = math.sin(theta)
    v = _potential(t, code, p0, p1, xs, vs)
    return (scale / p) * c * c + ((energy - v) / scale) * s * s


@njit(cache=True)
def prufer_rk4(a, b, steps, theta0, energy, scale, p, code, p0, p1, xs, vs):
    """Integrate the scaled Pruefer phase from ``a`` to ``b`` with classical RK4."""
    dt = (b - a) / steps
    theta = theta0
    t = a
    for i in range(steps):
        t = a + i * dt
        k1 = _phase_rate(t, theta, energy, scale, p, code, p0, p1, xs, vs)
        k2 = _phase_rate(t + 0.5 * dt, theta + 0.5 * dt * k1, energy, scale, p, code, p0, p1, xs, vs)
        k3 = _phase_rate(t + 0.5 * dt, theta + 0.5 * dt * k2, energy, scale, p, code, p0, p1, xs, vs)
        k4 = _phase_rate(t + dt, theta + dt * k3, energy, scale, p, code, p0, p1, xs, vs)
        theta += dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return theta


@njit(cache=True)
def potential_extremes(a, b, samples, code, p0, p1, xs, vs):
    vmin = np.inf
    vmax = -np.inf
    for i in range(samples + 1):
        t = a + (b - a) * i / samples
        v = _potential(t, code, p0, p1, xs, vs)
        vmin = min(vmin, v)
        vmax = max(vmax, v)
    return vmin, vmax
