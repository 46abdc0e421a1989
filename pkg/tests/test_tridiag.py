import math
from dataclasses import replace

import numpy as np
import pytest

from band_counter.core_types import (
    Annulus,
    DEFAULT_CONFIG,
    BoundaryPair,
    FiberProblem,
    Grid,
    PotentialKind,
    Strip,
    Variant,
    Weight,
    custom_problem,
    make_fiber_problem,
)
from band_counter.shooting import shoot_count
from band_counter.tridiag import (
    ResolutionError,
    count_below,
    discretize,
    eigenvalue,
    ground_state,
    ground_state_weights,
    relative_eigenvalue,
    richardson_eigenvalue,
    spectrum,
    temple_bound,
)


def free(bc, n=2000):
    p = custom_problem((0.0, math.pi), 1.0, bc)
    return discretize(p, Grid(0.0, math.pi, n))


def oscillator_on(a, b, h=1.0, m=0.0):
    return FiberProblem((a, b), h, m, PotentialKind.STRIP_HARMONIC, Weight.FLAT, BoundaryPair.parse("dd"))


def test_free_dirichlet_spectrum():
    op = free("dd")
    for k, exact in enumerate((1.0, 4.0, 9.0)):
        assert eigenvalue(op, k) == pytest.approx(exact, abs=1e-4)


def test_free_dirichlet_neumann_spectrum():
    op = free("dn")
    for k, exact in enumerate((0.25, 2.25, 6.25)):
        assert eigenvalue(op, k) == pytest.approx(exact, abs=1e-4)


def test_truncated_oscillator_levels():
    op = discretize(oscillator_on(-20.0, 20.0))
    assert eigenvalue(op, 0) == pytest.approx(1.0, rel=2e-3)
    assert eigenvalue(op, 1) == pytest.approx(3.0, rel=2e-3)


def test_count_below_free():
    op = free("dd")
    assert count_below(op, 5.0) == 2


def test_count_below_is_strict():
    op = free("dd")
    lam0 = eigenvalue(op, 0)
    assert count_below(op, lam0) == 0
    assert count_below(op, math.nextafter(lam0, 2.0) + 1e-12) == 1


def test_count_below_at_continuum_level_sees_discrete_level():
    # Central differences pull every free level slightly below k^2, so the
    # discrete ground level sits just under the threshold 1.
    op = free("dd")
    assert eigenvalue(op, 0) < 1.0
    assert count_below(op, 1.0) == 1


def test_count_below_favorable_strip_fiber():
    h = 0.01
    p = make_fiber_problem(Strip(1.0), -75, h, Variant.MIXED_DN)
    op = discretize(p)
    assert count_below(op, h) == 1
    assert eigenvalue(op, 0) < h
    assert shoot_count(p, h) == 1
    fitted = discretize(p, None, scheme="fitted")
    assert count_below(fitted, h) == 1


def test_eigenvalue_examples():
    assert eigenvalue(free("dd"), 0) == pytest.approx(1.0, abs=1e-5)
    p = make_fiber_problem(Strip(1.0), 0, 0.01, Variant.FULL_LINE)
    op = discretize(p)
    assert eigenvalue(op, 1) == pytest.approx(0.03, rel=1e-3)
    assert eigenvalue(op, 0) < eigenvalue(op, 1)


def test_eigenvalue_index_range():
    op = free("dd", 30)
    with pytest.raises(IndexError):
        eigenvalue(op, op.n)


def test_eigenvalue_bracket_contract():
    op = free("dd", 300)
    tol = 1e-12
    for k in range(4):
        lam = eigenvalue(op, k, tol)
        delta = 10 * tol * max(abs(lam), 1.0)
        assert count_below(op, lam - delta) <= k < count_below(op, lam + delta)


def test_ground_state_gaussian():
    p = make_fiber_problem(Strip(1.0), 0, 1.0, Variant.FULL_LINE)
    config = replace(DEFAULT_CONFIG, resolution=32)
    op = discretize(p, None, config)
    u = ground_state(op)
    exact = math.pi**-0.25 * np.exp(-0.5 * op.nodes**2)
    assert np.max(np.abs(u - exact)) < 1e-4
    assert np.sum(ground_state_weights(op) * u * u) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "problem",
    [
        make_fiber_problem(Strip(1.0), -30, 0.02, Variant.MIXED_DN),
        make_fiber_problem(Strip(1.0), -30, 0.02, Variant.PURE_NN),
        make_fiber_problem(Strip(1.0), -4, 1.0, Variant.HALFLINE_NEU),
    ],
)
@pytest.mark.parametrize("scheme", ["standard", "fitted"])
def test_ground_state_positive_with_small_residual(problem, scheme):
    op = discretize(problem, None, scheme=scheme)
    u = ground_state(op)
    assert np.all(u > 0)
    # residual of the stored matrix on the normalized unknown
    y = u * op.jacobian * np.exp(0.5 * op.log_mass - (op.log_reference if op.is_fitted else 0.0))
    y /= np.linalg.norm(y)
    mu = relative_eigenvalue(op, 0)
    r = op.diag * y - mu * y
    r[:-1] += op.offdiag * y[1:]
    r[1:] += op.offdiag * y[:-1]
    assert np.linalg.norm(r) <= 1e-8 * op.norm_bound


def test_ground_state_annulus_positive():
    p = make_fiber_problem(Annulus(0.5), 60, 0.005, Variant.MIXED_DN)
    for scheme in ("standard", "fitted"):
        u = ground_state(discretize(p, None, scheme=scheme))
        assert np.all(u > 0)


def test_richardson_free_dirichlet():
    p = custom_problem((0.0, math.pi), 1.0, "dd")
    value, err = richardson_eigenvalue(p, 0, Grid(0.0, math.pi, 500))
    assert abs(value - 1.0) <= 1e-7
    assert err > 0


def test_richardson_neumann_halfline_sign():
    p = make_fiber_problem(Strip(1.0), -4.0, 1.0, Variant.HALFLINE_NEU)
    for scheme in ("standard", "fitted"):
        value, err = richardson_eigenvalue(p, 0, None, scheme=scheme)
        assert value - 1.0 < 0
    shift, err = richardson_eigenvalue(p, 0, None, scheme="fitted", relative=True)
    assert shift < 0 and err < abs(shift)


def test_richardson_error_estimate_shrinks_fourfold():
    p = custom_problem((0.0, math.pi), 1.0, "dn")
    grid = Grid(0.0, math.pi, 99)
    _, e1 = richardson_eigenvalue(p, 0, grid)
    _, e2 = richardson_eigenvalue(p, 0, grid.refined())
    assert 3.5 <= e1 / e2 <= 4.5


def test_second_order_then_fourth_order():
    p = custom_problem((0.0, math.pi), 1.0, "dd")
    g = Grid(0.0, math.pi, 63)
    e = [abs(eigenvalue(discretize(p, gg), 1) - 4.0) for gg in (g, g.refined(), g.refined().refined())]
    assert 3.8 <= e[0] / e[1] <= 4.2 and 3.8 <= e[1] / e[2] <= 4.2
    r = [abs(richardson_eigenvalue(p, 1, gg)[0] - 4.0) for gg in (g, g.refined())]
    assert 12 <= r[0] / r[1] <= 20


def test_landau_levels_after_richardson():
    for h in (1.0, 0.1, 0.01):
        p = make_fiber_problem(Strip(1.0), 0, h, Variant.FULL_LINE)
        s = spectrum(p, 5)
        exact = (2 * np.arange(5) + 1) * h
        np.testing.assert_allclose(s.eigenvalues, exact, rtol=1e-6)
        assert all(e >= 0 for e in s.error_estimates)
        assert len(s.grid_sizes_used) == 2


def test_under_resolved_grid_rejected():
    p = make_fiber_problem(Strip(1.0), -30, 0.01, Variant.MIXED_DN)
    with pytest.raises(ResolutionError):
        discretize(p, Grid(0.0, 1.0, 20))


def test_radial_interval_must_avoid_origin():
    with pytest.raises(ValueError):
        FiberProblem((0.0, 1.0), 0.1, 3.0, PotentialKind.ANNULUS_RADIAL, Weight.RADIAL, BoundaryPair.parse("dn"))


def test_temple_tight_on_eigenvector():
    p = make_fiber_problem(Strip(1.0), -60, 0.01, Variant.MIXED_DN)
    op = discretize(p)
    u = ground_state(op)
    lam = eigenvalue(op, 0)
    gap = eigenvalue(op, 1) - 0.01
    tb = temple_bound(op, u, 0.01, 0.5 * gap)
    assert tb.valid
    assert tb.eps_sq == pytest.approx(0.0, abs=1e-16)
    assert tb.lower == pytest.approx(lam - 0.01, abs=1e-12)
    assert tb.upper == pytest.approx(lam - 0.01, abs=1e-12)


@pytest.mark.parametrize("scheme", ["standard", "fitted"])
def test_temple_sandwich_random_trial(scheme):
    rng = np.random.default_rng(7)
    p = make_fiber_problem(Strip(1.0), -25, 0.02, Variant.MIXED_DN)
    op = discretize(p, None, scheme=scheme)
    u = ground_state(op)
    direct = eigenvalue(op, 0) - 0.02
    beta = 0.9 * (eigenvalue(op, 1) - 0.02)
    for _ in range(5):
        bumps = rng.normal(size=4)
        x = (op.nodes - op.nodes[0]) / (op.nodes[-1] - op.nodes[0])
        trial = u * (1 + 0.05 * sum(c * np.sin((j + 1) * np.pi * x) for j, c in enumerate(bumps)))
        tb = temple_bound(op, trial, 0.02, beta)
        assert tb.valid
        assert tb.lower <= direct + 1e-12 * 0.02
        assert direct <= tb.upper + 1e-12 * 0.02


def test_temple_flags_invalid_gap():
    op = free("dd", 200)
    trial = np.sin(op.nodes)
    tb = temple_bound(op, trial, 0.0, 0.5)
    assert not tb.valid
    assert tb.lower <= tb.upper


def test_temple_rejects_bad_trial():
    op = free("dd", 200)
    with pytest.raises(ValueError):
        temple_bound(op, np.zeros(op.n), 0.0, 3.0)
    with pytest.raises(ValueError):
        temple_bound(op, np.ones(op.n + 1), 0.0, 3.0)
