"""Expensive shared objects of the plugins, built once per setting.

The Painleve-1 trajectory and the Boutroux invariants do not depend on eps;
the phase-shift table does.
"""
import functools
import logging
import math

from boutroux import chi_of_tau, lattice_phase, sigma0_solve, solve_g3
from equilibria import CRITICAL
from kuzmak import default_table
from p1_layer import first_correction, integrate_p1
from solution_sample import ELLIPTIC

log = logging.getLogger(__name__)


@functools.lru_cache(maxsize=4)
def _trajectory(tau0, tau1, tol, n_poles, v_max, w_scale, fit_v_min, fit_x_max, fit_threshold):
    traj = integrate_p1(tau0=tau0, tau1=tau1, tol=tol, n_poles=n_poles, v_max=v_max,
                        w_scale=w_scale, fit_v_min=fit_v_min, fit_x_max=fit_x_max,
                        fit_threshold=fit_threshold)
    return first_correction(traj, w_scale=w_scale)


def trajectory_for(rc):
    """P1 trajectory with first-correction data for a RunConfig."""
    return _trajectory(rc.tau0, rc.tau1, rc.p1_tol, rc.n_poles, rc.v_max, rc.w_pole_scale,
                       rc.fit_v_min, rc.fit_x_max, rc.fit_threshold)


@functools.lru_cache(maxsize=16)
def _elliptic_setup(eps, tau_far, traj_key, quad_tol):
    rc_traj = _trajectory(*traj_key)
    params = solve_g3(quad_tol=quad_tol)
    offset, spread = lattice_phase(rc_traj.poles, params)
    if math.isnan(spread):
        log.warning(f"[{ELLIPTIC}] fewer than one pole with k >= 5; lattice offset defaults to 0")
    elif spread > 0.05 * params.omega_real:
        log.warning(f"[{ELLIPTIC}] pole lattice spread {spread:.3g} exceeds 5% of Omega")
    chi_max = chi_of_tau(tau_far * eps ** -0.8, eps)
    table = sigma0_solve(chi_max, params, rc_traj.poles, eps)
    return params, offset, table


def elliptic_setup_for(rc, eps):
    """(EllipticParams, lattice offset, PhaseShiftTable) for a RunConfig at eps."""
    key = (rc.tau0, rc.tau1, rc.p1_tol, rc.n_poles, rc.v_max, rc.w_pole_scale,
           rc.fit_v_min, rc.fit_x_max, rc.fit_threshold)
    return _elliptic_setup(eps, rc.tau_far, key, rc.quad_tol)


def modulation_table_for(rc):
    return default_table(CRITICAL.t_star + rc.a_default, phase_a=rc.phase_a,
                         newton_max_iter=rc.newton_max_iter, quad_tol=rc.quad_tol)
