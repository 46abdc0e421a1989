import math

import numpy as np
import pytest

from band_counter.annulus import (
    QuasiMode,
    annulus_boundary_term,
    band0_annulus,
    band0_annulus_shift,
    count_annulus,
    crossover_from_count,
    default_eta,
    dirichlet_halfdisc_bounds,
    excited_annulus,
    halfdisc_exponent,
    halfdisc_shifts,
    laplace_norm_check,
    quasimode_rayleigh_annulus,
    quasimode_residual,
    transition_scan,
)
from band_counter.core_types import Annulus, Grid, Variant, make_fiber_problem
from band_counter.predictions import AnnulusPrediction, default_annulus_eps, r_tilde_sq

# lower end of the exterior certificate: r_* clear of R + eps
TEMPLE_CASES = [(0.3, 19, 0.005), (0.3, 27, 0.005), (0.5, 22, 0.01), (0.5, 79, 0.0025)]


def test_band0_favorable():
    assert band0_annulus(0.5, 80, 0.005) < 0.005


def test_band0_unfavorable():
    assert band0_annulus(0.5, 40, 0.005) > 0.005


def test_excited_above_h():
    for m in (20, 60, 90):
        assert excited_annulus(0.5, m, 0.005) > 0.005


def test_quasimode_geometry():
    qm = QuasiMode(35, 0.01)
    assert qm.r_star == pytest.approx(math.sqrt(0.7))
    r = np.linspace(0.5, 1.0, 200001)
    assert qm.phi_star == pytest.approx(float(np.min(qm.phi(r))), abs=1e-10)
    assert qm.phi_star == pytest.approx(0.7 * (1 - 2 * math.log(math.sqrt(0.7))), rel=1e-14)
    d = 1e-4
    second = (qm.phi_at(qm.r_star + d) - 2 * qm.phi_star + qm.phi_at(qm.r_star - d)) / d**2
    assert second == pytest.approx(4.0, rel=1e-6)
    assert qm.laplace_norm > 0


def test_quasimode_residual_small():
    assert quasimode_residual(0.5, 35, 0.01) <= 1e-3


def test_quasimode_residual_second_order():
    p = make_fiber_problem(Annulus(0.5), 35, 0.01, Variant.MIXED_DN)
    g = Grid.for_problem(p)
    a = quasimode_residual(0.5, 35, 0.01, g)
    b = quasimode_residual(0.5, 35, 0.01, g.refined())
    assert 3.5 <= a / b <= 4.5


def test_quasimode_residual_boundary_rows_dominate():
    p = make_fiber_problem(Annulus(0.5), 35, 0.01, Variant.MIXED_DN)
    g = Grid.for_problem(p)
    inner = [quasimode_residual(0.5, 35, 0.01, gg) for gg in (g, g.refined())]
    full = [quasimode_residual(0.5, 35, 0.01, gg, include_boundary=True) for gg in (g, g.refined())]
    assert full[0] > 10 * inner[0]
    # interior shrinks like spacing^2, the full residual at most like spacing^-1
    assert full[1] / inner[1] > 4 * full[0] / inner[0]


def test_laplace_norm_example():
    _, _, ratio = laplace_norm_check(0.5, 35, 0.01)
    assert 0.9 <= ratio <= 1.1


def test_laplace_norm_converges():
    hs = (0.01, 0.005, 0.0025, 0.00125)
    devs = [abs(laplace_norm_check(0.5, round(0.35 / h), h)[2] - 1) for h in hs]
    assert devs[-1] < devs[0]
    # monotone up to a wiggle of 10% of the initial deviation
    assert all(b <= a + 0.1 * devs[0] for a, b in zip(devs, devs[1:]))


def test_laplace_norm_window_check():
    with pytest.raises(ValueError):
        laplace_norm_check(0.5, 10, 0.01)


@pytest.fixture(scope="module")
def count_05():
    return count_annulus(0.5, 0.005)


def test_count_example(count_05):
    assert r_tilde_sq(0.5) == pytest.approx(0.75 / (2 * math.log(2)), rel=1e-14)
    assert r_tilde_sq(0.5) == pytest.approx(0.5411, abs=1e-4)
    assert 0.9 <= count_05.count * 2 * 0.005 / (1 - r_tilde_sq(0.5)) <= 1.1


def test_predicted_density():
    assert AnnulusPrediction(0.5).predicted_count(0.01) * 0.02 == pytest.approx(0.4589, abs=1e-4)


def test_second_band_excluded(count_05):
    assert all(lam > 0.005 for lam in count_05.excited_values.values())


def test_rough_window_contains_all_favorable(count_05):
    lo, hi = count_05.m_window
    below = [m for m, b in count_05.below.items() if b]
    assert lo < min(below) and max(below) < hi


def test_mixed_below_pure_neumann(count_05):
    nn = count_annulus(0.5, 0.005, variant=Variant.PURE_NN)
    assert count_05.count < nn.count


def test_crossover(count_05):
    m, pred = crossover_from_count(count_05), AnnulusPrediction(0.5).transition(0.005)
    assert pred == pytest.approx(54.1, abs=0.05)
    assert abs(m - pred) <= max(3, 0.05 * pred)


def test_crossover_scales_like_inverse_h():
    (m1, p1), (m2, p2) = transition_scan(0.5, 0.01), transition_scan(0.5, 0.005)
    assert m2 / m1 == pytest.approx(2.0, rel=0.1)
    assert p2 / p1 == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("R", [0.2, 0.5, 0.8])
def test_phi_balance_at_transition(R):
    rs2 = r_tilde_sq(R)
    phi = lambda r, s2: r * r - 2 * s2 * math.log(r)  # noqa: E731
    assert phi(1.0, rs2) == pytest.approx(phi(R, rs2), abs=1e-13)
    assert phi(1.0, 1.01 * rs2) < phi(R, 1.01 * rs2)
    assert phi(1.0, 0.99 * rs2) > phi(R, 0.99 * rs2)


def test_quasimode_rayleigh_negative():
    assert quasimode_rayleigh_annulus(0.5, 80, 0.005) < 0


@pytest.mark.parametrize("m,h", [(80, 0.005), (85, 0.005), (40, 0.01), (170, 0.0025)])
def test_quasimode_rayleigh_dominates_band0(m, h):
    rq = quasimode_rayleigh_annulus(0.5, m, h)
    shift, err = band0_annulus_shift(0.5, m, h)
    assert rq >= shift - 3 * err


def test_default_eta_constraints():
    R, m, h = 0.5, 80, 0.005
    eps = default_annulus_eps(R)
    eta = default_eta(R, m, h)
    qm = QuasiMode(m, h)
    assert 0 < eta < eps and R + eta < qm.r_star
    assert qm.phi_at(1.0) < qm.phi_at(R + eta) - eps * abs(math.log(R))
    with pytest.raises(ValueError):
        quasimode_rayleigh_annulus(R, m, h, eta=eps)


@pytest.mark.parametrize("m,h", [(80, 0.005), (40, 0.01), (30, 0.02)])
def test_annulus_boundary_term(m, h):
    rs2 = 2 * m * h
    exact = (rs2 - 1) / (2 * h) * math.exp(-1 / (2 * h))
    assert annulus_boundary_term(m, h) == pytest.approx(exact, rel=1e-3)
    assert annulus_boundary_term(m, h, math.sqrt(h) / 2048) == pytest.approx(exact, rel=1e-6)


def test_temple_scaled_example():
    h = 0.05
    m = 1.5**2 / (2 * h)
    tb = dirichlet_halfdisc_bounds(1.0, m, h)
    assert tb.valid and tb.lower > 0
    direct, _ = halfdisc_shifts(1.0, m, h)
    assert tb.lower <= direct <= tb.upper


@pytest.mark.parametrize("R,m,h", TEMPLE_CASES)
def test_temple_certifies_unfavorable(R, m, h):
    tb = dirichlet_halfdisc_bounds(R, m, h)
    assert tb.valid and tb.lower > 0
    direct, gap = halfdisc_shifts(R, m, h)
    assert tb.lower <= direct <= tb.upper
    assert gap > tb.beta


def test_temple_upper_exponential_scale():
    # upper ~ c h^(1/2) exp(-(phi(R) - phi(r_*))/2h) with c independent of h
    R, rs2 = 0.5, 0.4
    logc = []
    for h in (0.01, 0.005, 0.0025):
        m = rs2 / (2 * h)
        upper = dirichlet_halfdisc_bounds(R, m, h).upper
        logc.append(math.log(upper) + halfdisc_exponent(R, m, h) - 0.5 * math.log(h))
    assert max(logc) - min(logc) < 0.5


def test_temple_scaling_to_unit_radius():
    R, m, h = 0.5, 20, 0.01
    a = dirichlet_halfdisc_bounds(R, m, h)
    b = dirichlet_halfdisc_bounds(1.0, m, h / R**2)
    assert a.upper == pytest.approx(R**2 * b.upper, rel=1e-8)
    assert a.lower == pytest.approx(R**2 * b.lower, rel=1e-8)


def test_temple_requires_clearance():
    with pytest.raises(ValueError):
        dirichlet_halfdisc_bounds(0.7, 26, 0.01)
