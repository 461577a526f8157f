import math

import numpy as np
import pytest

from boutroux import (PhaseShiftTable, aperiodic_pair, chi_of_tau, curve_roots, cycle_integral,
                      elliptic_leading_eval, elliptic_validity, fp_forcing_p1_half, lattice_phase,
                      phase_of_tau, rho0_eval, sigma0_solve, solve_g3, wp_eval, wp_laurent)
from equilibria import CRITICAL
from p1_layer import InnerScale, PoleData, integrate_p1, jump_delta
from painleve_errors import NearPole, OutOfValidity

U_STAR = CRITICAL.u_star


@pytest.fixture(scope="module")
def params():
    return solve_g3()


# --- Boutroux condition ---

def test_boutroux_condition_holds(params):
    assert abs(cycle_integral(params.g3_std).real) < 1e-8
    assert params.g2 == pytest.approx(-2 * U_STAR ** 2)
    assert params.g3 == pytest.approx(abs(U_STAR) ** 3 * params.g3_std)
    assert params.omega_real > 0


def test_gauss_legendre_cycle_matches_adaptive(params):
    for g in (params.g3_std, params.g3_std + 0.5):
        assert cycle_integral(g, n_nodes=60) == pytest.approx(cycle_integral(g), abs=1e-10)


def test_quadrature_tolerance_reaches_the_invariants(params):
    loose = solve_g3(quad_tol=1e-9)
    assert loose.g3_std == pytest.approx(params.g3_std, abs=1e-7)
    assert loose.omega_real == pytest.approx(params.omega_real, rel=1e-7)


def test_curve_roots_satisfy_cubic():
    e1, e2, e3 = curve_roots(1.3)
    for e in (e1, e2, e3):
        assert abs(e ** 3 + e / 2 - 1.3 / 4) < 1e-12
    assert e3 == np.conj(e2)


# --- Weierstrass function ---

def test_wp_laurent_leading_terms():
    L = wp_laurent(-0.8, 0.3)
    assert L[-2] == 1.0
    assert L[2] == pytest.approx(-0.8 / 20)
    assert L[4] == pytest.approx(0.3 / 28)


@pytest.mark.parametrize("frac", [0.05, 0.2, 0.37, 0.5, 0.8])
def test_wp_satisfies_differential_equation(params, frac):
    s = frac * params.omega_real
    wp, dwp = wp_eval(s, params)
    defect = dwp ** 2 - (4 * wp ** 3 - params.g2 * wp - params.g3)
    assert abs(defect) < 1e-8 * max(1.0, abs(wp) ** 3)


def test_wp_periodic_and_even(params):
    omega = params.omega_real
    a = wp_eval(0.3 * omega, params)
    b = wp_eval(1.3 * omega, params)
    c = wp_eval(-0.3 * omega, params)
    assert a[0] == pytest.approx(b[0], rel=1e-12)
    assert a[0] == pytest.approx(c[0], rel=1e-12)
    assert c[1] == pytest.approx(-a[1], rel=1e-12)
    assert abs(wp_eval(0.5 * omega, params)[1]) < 1e-9


def test_wp_near_lattice_point_raises(params):
    with pytest.raises(NearPole):
        wp_eval(params.omega_real - 1e-7, params)


def test_rho0_solves_autonomous_equation(params):
    h = 1e-5
    for frac in (0.15, 0.3, 0.5, 0.7):
        s = frac * params.omega_real
        r, _ = rho0_eval(s, params)
        d2 = (rho0_eval(s + h, params)[1] - rho0_eval(s - h, params)[1]) / (2 * h)
        assert abs(d2 + 6 * U_STAR * r * r + U_STAR) < 1e-6, f"s={s}"


# --- aperiodic pair and finite parts ---

def test_aperiodic_pair_wronskian(params):
    pair = aperiodic_pair(params)
    assert pair.C == -2 * pair.gamma
    for frac in (0.5, 0.3, 0.2):
        s = frac * params.omega_real
        r, dr = rho0_eval(s, params)
        p1, dp1 = dr, -6 * U_STAR * r * r - U_STAR
        p2, dp2 = pair.sol(s)
        assert p1 * dp2 - dp1 * p2 == pytest.approx(1.0, abs=1e-9)


def test_finite_part_closed_form_matches_quadrature(params):
    closed = fp_forcing_p1_half(params)
    numeric = fp_forcing_p1_half(params, numeric=True)
    assert closed == pytest.approx(numeric, abs=1e-8)


# --- phase shift ---

def test_phase_shift_table_without_poles(params):
    table = sigma0_solve(1.0, params)
    assert len(table.states) == 1
    assert table.value(0.0) == 0.0
    assert table.value(0.5) == pytest.approx(0.5 * table.fallback_slope)


def test_phase_shift_is_continuous_across_breakpoints(params):
    eps = 1e-6
    pole = PoleData(k=1, tau_k=20.0, c_k=0.0, a1_minus=0.0, b1_minus=0.1, a1_plus=0.0,
                    b1_plus=0.1 + jump_delta(20.0))
    chi_k = chi_of_tau(20.0, eps)
    table = sigma0_solve(2 * chi_k, params, poles=(pole,), eps=eps)
    assert len(table.states) == 2
    d = 1e-9
    assert table.value(chi_k - d) == pytest.approx(table.value(chi_k + d), abs=1e-7)
    assert table.slope(chi_k + d) != table.slope(chi_k - d)


def test_phase_shift_table_lookup():
    from boutroux import PhaseShiftState
    table = PhaseShiftTable(states=(PhaseShiftState(0.0, 0.0, 1.0, 0), PhaseShiftState(1.0, 1.0, -1.0, 1)),
                            fallback_slope=1.0)
    assert table.value(0.5) == 0.5
    assert table.value(1.5) == 0.5
    assert table.slope(2.0) == -1.0


@pytest.mark.slow
def test_pole_phases_sit_on_the_lattice(params):
    traj = integrate_p1(-30.0, n_poles=10, tol=1e-11)
    s = np.array([phase_of_tau(p.tau_k) for p in traj.poles if p.k >= 5])
    spacing = np.diff(s)
    assert np.all(np.abs(spacing - params.omega_real) < 0.05 * params.omega_real), f"{spacing}"
    offset, spread = lattice_phase(traj.poles, params)
    assert spread < 0.05 * params.omega_real


# --- evaluation ---

def test_elliptic_validity_bounds(params):
    eps = 1e-8
    assert not elliptic_validity(InnerScale(eps).t_of_tau(2.0), eps, params)
    assert not elliptic_validity(CRITICAL.t_star + 0.5, 1e-3, params)
    assert not elliptic_validity(CRITICAL.t_star, 0.0, params)


def test_elliptic_leading_eval_mid_lattice(params):
    eps = 1e-8
    omega = params.omega_real
    s = 3.5 * omega
    tau = (s / 0.8) ** 0.8
    t = InnerScale(eps).t_of_tau(tau)
    sample = elliptic_leading_eval(t, eps, params)
    assert sample.regime == "EllipticII_inf"
    r, _ = rho0_eval(sample.extra['s'], params)
    assert sample.u == pytest.approx(U_STAR + eps ** 0.4 * math.sqrt(sample.extra['tau']) * r, rel=1e-12)
    assert sample.extra['s'] == pytest.approx(s, rel=1e-9)


def test_elliptic_eval_near_lattice_point_is_invalid(params):
    eps = 1e-8
    s = 4.0 * params.omega_real + 1e-3
    t = InnerScale(eps).t_of_tau((s / 0.8) ** 0.8)
    with pytest.raises(OutOfValidity):
        elliptic_leading_eval(t, eps, params)
