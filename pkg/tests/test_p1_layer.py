import math

import numpy as np
import pytest

from equilibria import CRITICAL
from laurent_series import Laurent
from oracle import continue_pole, laurent_right, solve_p2
from outer_expansion import outer_value
from p1_layer import (InnerScale, _project, far_field_v0, first_correction, inner1_eval, inner1_validity,
                      integrate_p1, jump_delta, laurent_v0, linear_series, locate_pole, p1_seed,
                      pole_window, tritronquee_scale)
from painleve_errors import OutOfValidity, PoleFitFailure, ProjectionIllConditioned, SeedOutOfRange

U_STAR = CRITICAL.u_star
# first real pole of the tritronquee solution of y'' = 6y^2 + x
TRITRONQUEE_POLE = 2.3841687


@pytest.fixture(scope="module")
def trajectory():
    return first_correction(integrate_p1(-30.0, n_poles=3, tol=1e-11))


# --- seed ---

def test_seed_values():
    v, dv = p1_seed(-24.0)
    expected = -2.0 + 1.0 / (48 * U_STAR * 576) + 49.0 / (768 * math.sqrt(6) * U_STAR ** 2 * 24 ** 4.5)
    assert v == pytest.approx(expected, rel=1e-14)
    assert dv > 0


def test_seed_leading_ratio():
    for tau in (-1e3, -1e5):
        assert far_field_v0(tau) / -math.sqrt(-tau / 6) == pytest.approx(1.0, abs=1e-3)


def test_seed_satisfies_p1_asymptotically():
    tau, h = -30.0, 1e-3
    d2 = (far_field_v0(tau + h) - 2 * far_field_v0(tau) + far_field_v0(tau - h)) / h ** 2
    v = far_field_v0(tau)
    assert abs(d2 + 6 * U_STAR * v * v + U_STAR * tau) < 1e-6


def test_seed_out_of_range():
    with pytest.raises(SeedOutOfRange):
        p1_seed(-5.0)


# --- pole fitting ---

def test_locate_pole_recovers_synthetic_laurent_data():
    L = laurent_v0(2.0, 0.3)
    taus = 2.0 - np.geomspace(0.3, 0.01, 40)
    pole = locate_pole(taus, L(taus - 2.0))
    assert pole.tau_k == pytest.approx(2.0, abs=1e-8)
    assert pole.c_k == pytest.approx(0.3, abs=1e-8)


def test_locate_pole_underdetermined_window():
    with pytest.raises(PoleFitFailure):
        locate_pole([1.0, 1.1, 1.2], [10.0, 20.0, 40.0])


def test_laurent_fixed_coefficients():
    L = laurent_v0(1.7, -0.2)
    assert L[-2] == pytest.approx(-1 / U_STAR)
    assert L[2] == pytest.approx(1.7 * U_STAR / 10)
    assert L[3] == pytest.approx(U_STAR / 6)
    assert L[4] == -0.2


def test_unforced_series_keeps_the_x4_solution():
    v0 = laurent_v0(2.0, 0.3)
    hom2, defect = linear_series(v0, Laurent(0, np.zeros(1)), 0.0, 1.0)
    assert hom2[4] == 1.0
    assert hom2[-3] == 0.0
    assert hom2.hi >= 30
    assert defect == 0.0
    x = np.linspace(0.05, 0.2, 5)
    lhs = hom2.derivative().derivative()(x) + 12 * U_STAR * v0(x) * hom2(x)
    assert np.max(np.abs(lhs)) < 1e-10


def test_projection_rejects_a_zero_column():
    zero, one = Laurent(0, np.zeros(1)), Laurent(0, np.ones(1))
    x = np.linspace(0.1, 0.2, 12)
    with pytest.raises(ProjectionIllConditioned):
        _project(x, np.zeros(12), zero, one, zero)


# --- trajectory ---

def test_first_pole_matches_tritronquee(trajectory):
    A, B = tritronquee_scale()
    p = trajectory.poles[0]
    assert p.tau_k == pytest.approx(B * TRITRONQUEE_POLE, abs=1e-5)
    assert p.fit_residual < 1e-6


def test_poles_ordered_with_shrinking_spacing(trajectory):
    taus = [p.tau_k for p in trajectory.poles]
    assert len(taus) == 3
    assert all(b > a for a, b in zip(taus, taus[1:]))
    gaps = np.diff(taus)
    assert gaps[1] < gaps[0]


def test_samples_avoid_pole_windows(trajectory):
    for tau, _, _ in trajectory.samples:
        for p in trajectory.poles:
            assert abs(tau - p.tau_k) >= pole_window(p.tau_k)


def test_solution_satisfies_p1_before_first_pole(trajectory):
    h = 1e-3
    for tau in np.linspace(-29.0, -20.0, 10):
        d2 = (trajectory.v0(tau + h, True) - trajectory.v0(tau - h, True)) / (2 * h)
        v = trajectory.v0(tau)
        assert abs(d2 + 6 * U_STAR * v * v + U_STAR * tau) < 1e-6, f"tau={tau}"


@pytest.mark.slow
def test_pole_location_stable_under_refinement(trajectory):
    fine = integrate_p1(-30.0, n_poles=2, tol=1e-13)
    for a, b in zip(trajectory.poles[:2], fine.poles):
        assert a.tau_k == pytest.approx(b.tau_k, abs=1e-6)


def test_free_quadratic_fit_returns_fixed_value(trajectory):
    p = trajectory.poles[0]
    taus = p.tau_k - np.geomspace(0.3, 0.01, 40)
    vs = np.array([trajectory.v0(t) for t in taus])
    free = locate_pole(taus, vs, p.tau_k, free_quadratic=True)
    assert free.a1_minus == pytest.approx(p.tau_k * U_STAR / 10, rel=1e-2)


def test_ck_agrees_left_and_right(trajectory):
    p = trajectory.poles[0]
    w = pole_window(p.tau_k)
    taus = p.tau_k + np.geomspace(w, 4 * w, 40)
    vs = np.array([trajectory.v0(t) for t in taus])
    right = locate_pole(taus, vs, p.tau_k)
    assert right.c_k == pytest.approx(p.c_k, abs=1e-5)
    assert right.tau_k == pytest.approx(p.tau_k, abs=1e-7)


def test_complex_continuation_reproduces_restart(trajectory):
    p = trajectory.poles[0]
    r = 0.3
    v, dv = continue_pole(p.tau_k, p.c_k, radius=r)
    assert abs(v.imag) < 1e-8 and abs(dv.imag) < 1e-8
    assert v.real == pytest.approx(laurent_right(p.tau_k, p.c_k, r)[0], abs=1e-6)
    assert v.real == pytest.approx(trajectory.v0(p.tau_k + r), abs=1e-5)
    assert laurent_right(p.tau_k, p.c_k, -r)[0] == pytest.approx(trajectory.v0(p.tau_k - r), abs=1e-5)


# --- first correction ---

def test_v1_seed_residual():
    from p1_layer import far_field_v1
    tau, h = -30.0, 1e-3
    v0 = far_field_v0(tau)
    v1 = far_field_v1(tau)
    d2 = (far_field_v1(tau + h) - 2 * v1 + far_field_v1(tau - h)) / h ** 2
    assert abs(d2 + 12 * U_STAR * v0 * v1 + 2 * v0 ** 3 + tau * v0) < 1e-6


def test_connection_constants_across_poles(trajectory):
    for p in trajectory.poles[:2]:
        assert p.has_correction
        assert p.a1_plus == p.a1_minus
        assert p.b1_plus - p.b1_minus == pytest.approx(jump_delta(p.tau_k), rel=1e-12)
        assert p.a1_plus_measured == pytest.approx(p.a1_minus, rel=1e-5, abs=1e-5)
        measured_jump = p.b1_plus_measured - p.b1_minus
        assert measured_jump == pytest.approx(jump_delta(p.tau_k), rel=2e-2), f"pole {p.k}"


def test_jump_formula():
    assert jump_delta(2.0) == pytest.approx(-22 * U_STAR ** 3 * 4 / 75)
    assert jump_delta(2.0) > 0


# --- evaluation ---

def test_inner_scale_round_trip():
    s = InnerScale(1e-3)
    for tau in (-20.0, 0.0, 3.3):
        assert s.tau_of_t(s.t_of_tau(tau)) == pytest.approx(tau, abs=1e-12)
    assert s.v_of_u(s.u_of_v(0.7)) == pytest.approx(0.7, abs=1e-12)


def test_inner1_matches_outer_in_overlap(trajectory):
    """Difference at fixed tau = -20 shrinks like eps^(6/5)."""
    diffs = []
    for eps in (1e-3, 1e-4):
        s = InnerScale(eps)
        t = s.t_of_tau(-20.0)
        inner = U_STAR + eps ** 0.4 * trajectory.v0(-20.0) + eps ** 0.8 * trajectory.v1(-20.0)
        diffs.append(abs(inner - outer_value(t, eps)))
    assert diffs[1] < 0.2 * diffs[0], f"{diffs}"


def test_inner1_eval_and_validity(trajectory):
    eps = 1e-8
    p = trajectory.poles[0]
    mid = 0.5 * (p.tau_k + trajectory.poles[1].tau_k)
    t = InnerScale(eps).t_of_tau(mid)
    s = inner1_eval(t, eps, trajectory)
    assert s.regime == "PainleveII"
    assert s.u == pytest.approx(U_STAR + eps ** 0.4 * s.extra['v0'] + eps ** 0.8 * s.extra['v1'])
    near = InnerScale(eps).t_of_tau(p.tau_k + 1e-3)
    assert not inner1_validity(near, eps, trajectory)


def test_inner1_requires_positive_eps(trajectory):
    with pytest.raises(OutOfValidity):
        inner1_eval(CRITICAL.t_star, 0.0, trajectory)


def _defect(trajectory, tau, eps, h=1e-2):
    """eps^2 u'' + 2u^3 + tu - 1 for the two-term inner sum, by central differences in tau."""
    def u(x):
        return U_STAR + eps ** 0.4 * trajectory.v0(x) + eps ** 0.8 * trajectory.v1(x)
    t = InnerScale(eps).t_of_tau(tau)
    d2 = (u(tau + h) - 2 * u(tau) + u(tau - h)) / h ** 2
    return eps ** 0.4 * d2 + 2 * u(tau) ** 3 + t * u(tau) - 1.0


@pytest.mark.parametrize("eps", [1e-3, 1e-4])
def test_inner1_residual_matches_equation_defect(trajectory, eps):
    tau = -8.0
    s = inner1_eval(InnerScale(eps).t_of_tau(tau), eps, trajectory)
    assert s.residual == pytest.approx(abs(_defect(trajectory, tau, eps)), rel=0.02)


def test_inner1_residual_scales_like_eps_to_the_8_5(trajectory):
    tau = -8.0
    res = [inner1_eval(InnerScale(eps).t_of_tau(tau), eps, trajectory).residual for eps in (1e-4, 1e-5)]
    assert math.log10(res[0] / res[1]) == pytest.approx(1.6, abs=0.1)


@pytest.mark.slow
def test_inner1_converges_to_oracle_between_poles(trajectory):
    p1, p2 = trajectory.poles[:2]
    tau = 0.5 * (p1.tau_k + p2.tau_k)
    errs = []
    epss = (1e-3, 1e-4)
    for eps in epss:
        s = InnerScale(eps)
        t = s.t_of_tau(tau)
        run = solve_p2(eps, CRITICAL.t_star - 1.0, t + 1e-3, tol=1e-11)
        inner = U_STAR + eps ** 0.4 * trajectory.v0(tau) + eps ** 0.8 * trajectory.v1(tau)
        errs.append(abs(inner - run.u(t)))
    slope = math.log(errs[0] / errs[1]) / math.log(epss[0] / epss[1])
    assert slope >= 0.7, f"errors {errs}, slope {slope}"
