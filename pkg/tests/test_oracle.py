import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from equilibria import CRITICAL, least_root
from kuzmak import solve_E
from oracle import (PEAK, TROUGH, crossings, extract_envelope, hamiltonian, initial_condition,
                    solve_p2)
from outer_expansion import outer_value
from painleve_errors import DegenerateBranch, EmptyWindow

T_STAR = CRITICAL.t_star
U_STAR = CRITICAL.u_star
FIGURE_EPS = math.sqrt(0.1)


@pytest.fixture(scope="module")
def run_small():
    """eps = 1e-2 through the loss of stability into the oscillating regime."""
    return solve_p2(1e-2, T_STAR - 1.0, T_STAR + 0.6)


@pytest.fixture(scope="module")
def run_figure():
    return solve_p2(FIGURE_EPS, T_STAR - 1.0, T_STAR + 2.5)


# --- initial condition ---

def test_initial_condition_near_outer_branch():
    u, du = initial_condition(T_STAR - 1.0, 1e-2)
    assert abs(u - least_root(T_STAR - 1.0)) < 2e-4
    u0, _ = initial_condition(T_STAR - 1.0, 0.0)
    assert u0 == least_root(T_STAR - 1.0)
    assert du > 0


def test_initial_condition_rejects_degenerate_start():
    with pytest.raises(DegenerateBranch):
        initial_condition(T_STAR - 0.1, 1e-2)


def test_solve_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        solve_p2(0.0, T_STAR - 1.0, T_STAR)


# --- integration ---

def test_stays_on_outer_branch_before_critical(run_small):
    eps = run_small.eps
    for t in np.linspace(T_STAR - 1.0, T_STAR - 0.3, 15):
        assert abs(run_small.u(t) - outer_value(t, eps)) < 10 * eps ** 4, f"t={t}"


@pytest.mark.slow
def test_outer_error_order_in_eps():
    """The eps^4 mismatch of the start value dominates the distance to the outer series."""
    epss = (4e-2, 2e-2, 1e-2)
    ts = np.linspace(T_STAR - 1.0, T_STAR - 0.3, 200)
    errs = []
    for eps in epss:
        run = solve_p2(eps, T_STAR - 1.0, T_STAR - 0.3, tol=1e-12)
        errs.append(max(abs(run.u(t) - outer_value(t, eps)) for t in ts))
    slope = np.polyfit(np.log(epss), np.log(errs), 1)[0]
    assert slope >= 3.5, f"errors {errs}, slope {slope}"


def test_energy_drift_identity(run_small):
    """H(t1) - H(t0) equals the integral of u^2/2 along the run."""
    assert run_small.max_drift < 100 * run_small.tol
    ts = np.linspace(run_small.t0, run_small.t1, 200001)
    u, du = run_small.sol(ts)[:2]
    dH = hamiltonian(ts[-1], u[-1], du[-1], run_small.eps) - hamiltonian(ts[0], u[0], du[0], run_small.eps)
    assert dH == pytest.approx(trapezoid(0.5 * u * u, ts), rel=1e-6)


def test_first_peak_is_pole_layer_height():
    run = solve_p2(1e-2, T_STAR - 1.0, T_STAR + 0.2)
    peaks = run.peaks(PEAK)
    assert peaks, "no oscillation started"
    first = peaks[0]
    assert first.t > T_STAR
    assert abs(first.u - (-3 * U_STAR)) < 0.1, f"first peak {first.u} at t={first.t}"


def test_turning_points_alternate(run_small):
    kinds = [e.kind for e in run_small.events if e.t > T_STAR]
    assert len(kinds) > 4
    assert all(a != b for a, b in zip(kinds, kinds[1:]))
    assert set(kinds) == {PEAK, TROUGH}


def test_samples_tagged_as_oracle(run_small):
    rows = run_small.as_samples()
    assert len(rows) == len(run_small.samples)
    assert rows[0].regime == "Oracle" and rows[0].residual == run_small.max_drift


# --- eps^2 = 0.1 through the bifurcation ---

def test_figure_slow_branch_is_monotone(run_figure):
    assert crossings(run_figure, T_STAR - 1.0, T_STAR - 0.5).size == 0
    ts = np.linspace(T_STAR - 1.0, T_STAR - 0.5, 30)
    u = [run_figure.u(t) for t in ts]
    assert np.all(np.diff(u) > 0)
    assert max(abs(v - least_root(t)) for t, v in zip(ts, u)) < 0.05


def test_figure_oscillates_after_critical_point(run_figure):
    events = [e for e in run_figure.events if T_STAR + 0.1 <= e.t <= T_STAR + 2.5]
    peaks = [e.u for e in events if e.kind == PEAK]
    troughs = [e.u for e in events if e.kind == TROUGH]
    assert peaks and troughs
    assert max(peaks) - min(troughs) > 0.5


def test_figure_turning_points_inside_modulated_band(run_figure):
    events = [e for e in run_figure.events if T_STAR + 0.1 < e.t <= T_STAR + 2.5]
    assert events
    for e in events:
        state = solve_E(e.t)
        assert state.beta - 0.1 <= e.u <= state.alpha + 0.1, f"{e.kind} at t={e.t:.4f}: u={e.u:.4f}"


def test_envelope_stable_under_tolerance_halving():
    a = solve_p2(0.1, T_STAR - 1.0, T_STAR + 1.5, tol=1e-9)
    b = solve_p2(0.1, T_STAR - 1.0, T_STAR + 1.5, tol=5e-10)
    pa = max(e.u for e in a.peaks(PEAK) if e.t > T_STAR + 0.5)
    pb = max(e.u for e in b.peaks(PEAK) if e.t > T_STAR + 0.5)
    assert pa == pytest.approx(pb, abs=1e-3)


@pytest.mark.slow
def test_error_shrinks_with_tolerance():
    t_end = T_STAR + 0.5
    ref = solve_p2(0.1, T_STAR - 1.0, t_end, tol=1e-13).u(t_end)
    tols = (1e-6, 1e-8)
    errs = [abs(solve_p2(0.1, T_STAR - 1.0, t_end, tol=tol).u(t_end) - ref) for tol in tols]
    slope = math.log(errs[0] / errs[1]) / math.log(tols[0] / tols[1])
    assert slope >= 0.5, f"errors {errs}"


# --- envelopes ---

def test_envelope_of_slow_region(run_small):
    env = extract_envelope(run_small, 0.1)
    slow = [w for w in env if w[0] < T_STAR - 0.1]
    assert slow
    for centre, lo, hi in slow:
        assert lo == hi == pytest.approx(run_small.u(centre))


def test_envelope_window_shorter_than_period(run_small):
    with pytest.raises(EmptyWindow):
        extract_envelope(run_small, 1e-3)


def test_envelope_matches_closed_orbit(run_small):
    t, eps = T_STAR + 0.5, run_small.eps
    state = solve_E(t)
    inside = [e for e in run_small.events if t - 0.04 <= e.t <= t + 0.04]
    hi = max(e.u for e in inside if e.kind == PEAK)
    lo = min(e.u for e in inside if e.kind == TROUGH)
    assert hi == pytest.approx(state.alpha, abs=3 * eps)
    assert lo == pytest.approx(state.beta, abs=3 * eps)
