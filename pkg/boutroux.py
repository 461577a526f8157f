"""tau -> +inf behaviour of the Painleve-1 layer: v0 ~ sqrt(tau) rho0(s).

    rho0 = -wp(s; g2, g3) / u*,   s = 4/5 tau^(5/4) + sigma0(chi)

rho0'' + 6u* rho0^2 + u* = 0 fixes g2 = -2u*^2.  g3 comes from the
Boutroux condition Re of the cycle integral of omega dlambda = 0 on the
normalized curve omega^2 = lambda^3 + lambda/2 - g3_std/4, with
g3 = |u*|^3 g3_std.  wp is evaluated by integrating wp'' = 6wp^2 - g2/2
from its Laurent seed near the lattice point at 0 and reducing by the real
period.
"""
import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from equilibria import CRITICAL
from laurent_series import Laurent, from_dict
from painleve_errors import (BracketFailure, NearPole, OutOfValidity, ProjectionIllConditioned,
                             QuadratureFailure, RegularizationFailure)
from p1_layer import InnerScale, linear_series
from solution_sample import ELLIPTIC, SolutionSample, ValidityCheck

log = logging.getLogger(__name__)

U_STAR = CRITICAL.u_star
NEAR_POLE = 1e-6
WP_ORDER = 40
G3_SCAN = (-20.0, 20.0)
G3_SCAN_POINTS = 401
TAU_MIN = 5.0
M_POLE = 5.0
TAU_FAR = 0.2
QUAD_TOL = 1e-13


@dataclass(frozen=True)
class EllipticParams:
    g2: float
    g3: float
    omega_real: float
    u_star: float = U_STAR
    g3_std: float = math.nan


@dataclass(frozen=True)
class PhaseShiftState:
    chi: float
    sigma0: float
    sigma0_prime: float
    k: int


@dataclass(frozen=True)
class PhaseShiftTable:
    """Piecewise-linear sigma0(chi) with breakpoints at chi_k."""
    states: tuple
    fallback_slope: float
    meta: dict = field(default_factory=dict, compare=False)

    def value(self, chi):
        seg = self.states[0]
        for st in self.states:
            if st.chi <= chi:
                seg = st
            else:
                break
        return seg.sigma0 + seg.sigma0_prime * (chi - seg.chi)

    def slope(self, chi):
        seg = self.states[0]
        for st in self.states:
            if st.chi <= chi:
                seg = st
        return seg.sigma0_prime


# ---------------------------------------------------------------------------
# Boutroux condition
# ---------------------------------------------------------------------------

def curve_roots(g3_std):
    """Roots (e1 real, e2 upper, e3 lower) of lambda^3 + lambda/2 - g3_std/4."""
    r = np.roots([1.0, 0.0, 0.5, -0.25 * g3_std])
    e1 = r[np.argmin(np.abs(r.imag))].real
    e2 = r[np.argmax(r.imag)]
    return e1, e2, np.conj(e2)


def cycle_integral(g3_std, n_nodes=None, quad_tol=QUAD_TOL):
    """Integral of omega dlambda around the cycle through e1 and e2.

    lambda = e1 + sigma (e2 - e1) gives
        2i (e2-e1)^2 int_0^1 sqrt(sigma(1-sigma)) sqrt(lambda - e3) dsigma.
    With n_nodes the sigma = sin^2(phi) form is summed by Gauss-Legendre
    instead of adaptive quadrature.
    """
    e1, e2, e3 = curve_roots(g3_std)
    d = e2 - e1

    if n_nodes is None:
        def part(sig, which):
            val = math.sqrt(sig * (1.0 - sig)) * np.sqrt(e1 + sig * d - e3)
            return val.real if which == 0 else val.imag
        re, err_re = quad(part, 0.0, 1.0, args=(0,), epsabs=0.1 * quad_tol, epsrel=quad_tol, limit=200)
        im, err_im = quad(part, 0.0, 1.0, args=(1,), epsabs=0.1 * quad_tol, epsrel=quad_tol, limit=200)
        if max(err_re, err_im) > max(1e-10, 1e3 * quad_tol):
            raise QuadratureFailure(f"cycle integral error estimate {max(err_re, err_im):.2e}")
        core = re + 1j * im
    else:
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        phi = 0.25 * math.pi * (x + 1.0)
        sig = np.sin(phi) ** 2
        integrand = 2.0 * np.sin(phi) ** 2 * np.cos(phi) ** 2 * np.sqrt(e1 + sig * d - e3)
        core = 0.25 * math.pi * np.sum(w * integrand)
    return 2j * d * d * core


def weierstrass_real_period(g2, g3, quad_tol=QUAD_TOL):
    """Real period 4 int_0^inf dy / sqrt(Q(e1 + y^2)) of wp with real invariants."""
    r = np.roots([4.0, 0.0, -g2, -g3])
    e1 = float(r[np.argmin(np.abs(r.imag))].real)

    def integrand(y):
        x = e1 + y * y
        return 1.0 / math.sqrt(4.0 * x * x + 4.0 * e1 * x + 4.0 * e1 * e1 - g2)

    val, err = quad(integrand, 0.0, math.inf, epsabs=0.1 * quad_tol, epsrel=quad_tol, limit=200)
    if err > max(1e-9, 1e4 * quad_tol):
        raise QuadratureFailure(f"real period error estimate {err:.2e}")
    return 4.0 * val


@functools.lru_cache(maxsize=4)
def solve_g3(scan=G3_SCAN, points=G3_SCAN_POINTS, quad_tol=QUAD_TOL):
    """Solves the Boutroux condition and returns the elliptic parameters.

    Raises:
        BracketFailure: no sign change of the real cycle integral on the scan.
    """
    grid = np.linspace(scan[0], scan[1], points)
    vals = np.array([cycle_integral(g, quad_tol=quad_tol).real for g in grid])
    roots = []
    for i in range(points - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(lambda g: cycle_integral(g, quad_tol=quad_tol).real, grid[i], grid[i + 1],
                                xtol=1e-15, rtol=1e-15))
    if not roots:
        raise BracketFailure(f"no sign change of Re(cycle) for g3 in {scan}")
    if len(roots) > 1:
        log.info(f"Boutroux condition has {len(roots)} roots {roots}; using the smallest |g3|")
    g3_std = float(min(roots, key=abs))
    g2 = -2.0 * U_STAR ** 2
    g3 = abs(U_STAR) ** 3 * g3_std
    omega = weierstrass_real_period(g2, g3, quad_tol)
    log.info(f"Boutroux: g3_std={g3_std:.12f} g2={g2:.12f} g3={g3:.12f} Omega={omega:.12f}")
    return EllipticParams(g2=g2, g3=g3, omega_real=omega, g3_std=g3_std)


# ---------------------------------------------------------------------------
# Weierstrass function
# ---------------------------------------------------------------------------

def wp_laurent(g2, g3, order=WP_ORDER):
    """wp(s) = 1/s^2 + sum c_k s^(2k-2), as a Laurent series in s."""
    K = order // 2 + 1
    c = np.zeros(K + 1)
    if K >= 2:
        c[2] = g2 / 20.0
    if K >= 3:
        c[3] = g3 / 28.0
    for k in range(4, K + 1):
        c[k] = 3.0 / ((2 * k + 1) * (k - 3)) * sum(c[m] * c[k - m] for m in range(2, k - 1))
    terms = {2 * k - 2: c[k] for k in range(2, K + 1)}
    terms[-2] = 1.0
    return from_dict(terms, -2, 2 * K - 2)


@functools.lru_cache(maxsize=8)
def _wp_solution(g2, g3, omega):
    s0 = omega / 10.0
    L = wp_laurent(g2, g3)
    y0 = [float(L(s0)), float(L.derivative()(s0))]
    sol = solve_ivp(lambda s, y: [y[1], 6.0 * y[0] ** 2 - 0.5 * g2], (s0, 0.5 * omega), y0,
                    method='DOP853', rtol=1e-13, atol=1e-13, dense_output=True)
    if sol.status != 0:
        raise QuadratureFailure(f"wp integration failed: {sol.message}")
    return s0, L, sol.sol


def wp_eval(s, params):
    """(wp(s), wp'(s)) on the real axis.

    Raises:
        NearPole: s within 1e-6 of a lattice point.
    """
    omega = params.omega_real
    r = math.fmod(s, omega)
    if r < 0:
        r += omega
    sign = 1.0
    if r > 0.5 * omega:
        r = omega - r
        sign = -1.0
    if r < NEAR_POLE:
        raise NearPole(f"s={s} is within {NEAR_POLE} of a lattice point")
    s0, L, sol = _wp_solution(params.g2, params.g3, omega)
    if r < s0:
        return float(L(r)), sign * float(L.derivative()(r))
    y = sol(r)
    return float(y[0]), sign * float(y[1])


def rho0_eval(s, params):
    wp, dwp = wp_eval(s, params)
    return -wp / params.u_star, -dwp / params.u_star


def rho0_laurent(params, order=WP_ORDER):
    return wp_laurent(params.g2, params.g3, order).scale(-1.0 / params.u_star)


# ---------------------------------------------------------------------------
# regularized integrals and the phase shift
# ---------------------------------------------------------------------------

def regularized_integral(func, series, b, split):
    """Finite part of int_0^b func, with `series` the Laurent expansion of func at 0.

    The singular piece on [0, split] is integrated term by term; the rest by quadrature.

    Raises:
        RegularizationFailure: the series carries a 1/s term.
    """
    c_log = series[-1]
    scale = max([1.0] + [abs(series[n]) * split ** n for n in range(series.lo, 0)])
    if abs(c_log) * split ** -1 > 1e-8 * scale:
        raise RegularizationFailure(f"1/s coefficient {c_log:.3e} in finite-part integrand")
    if c_log != 0.0:
        coeffs = series.coeffs.copy()
        coeffs[-1 - series.lo] = 0.0
        series = Laurent(series.lo, coeffs)
    head = series.integral_finite_part(0.0, split)
    tail, err = quad(func, split, b, epsabs=1e-13, epsrel=1e-12, limit=200)
    if err > 1e-8 * max(1.0, abs(tail)):
        raise QuadratureFailure(f"regularized integral tail error {err:.2e}")
    return head + tail


@dataclass(frozen=True)
class AperiodicPair:
    """p1 = rho0' and the second solution p2, even about Omega/2 with W(p1, p2) = 1.

    Near 0, p2 = gamma p1 + delta q4; p2(s + Omega) = C p1(s) + p2(s) with C = -2 gamma.
    """
    gamma: float
    delta: float
    C: float
    split: float
    sol: object = field(repr=False)


@functools.lru_cache(maxsize=4)
def aperiodic_pair(params):
    omega = params.omega_real
    half = 0.5 * omega
    split = omega / 8.0
    c = params.u_star
    wp_half, _ = wp_eval(half, params)
    p1_prime_half = -(6.0 * wp_half ** 2 - 0.5 * params.g2) / c

    def rhs(s, y):
        wp, _ = wp_eval(s, params)
        return [y[1], 12.0 * wp * y[0]]

    sol = solve_ivp(rhs, (half, split), [-1.0 / p1_prime_half, 0.0], method='DOP853',
                    rtol=1e-12, atol=1e-14, dense_output=True)
    if sol.status != 0:
        raise QuadratureFailure(f"aperiodic solution failed: {sol.message}")
    rho = rho0_laurent(params)
    p1 = rho.derivative()
    q4, _ = linear_series(rho, Laurent(0, np.zeros(1)), 0.0, 1.0)
    A = np.array([[p1(split), q4(split)], [p1.derivative()(split), q4.derivative()(split)]], dtype=float)
    try:
        gamma, delta = np.linalg.solve(A, sol.sol(split))
    except np.linalg.LinAlgError as e:
        raise ProjectionIllConditioned(f"aperiodic pair matching at s={split:.6f}: {e}") from e
    log.debug(f"aperiodic pair: gamma={gamma:.10f} delta={delta:.10f}")
    return AperiodicPair(gamma=float(gamma), delta=float(delta), C=-2.0 * float(gamma),
                         split=split, sol=sol.sol)


def _forcing(rho):
    return rho + 2.0 * rho ** 3


def fp_forcing_p1_half(params, numeric=False):
    """Finite part of int_0^(Omega/2) f p1 with f = rho0 + 2rho0^3 and p1 = rho0'.

    f p1 is the derivative of F = rho0^2/2 + rho0^4/2, so the finite part is
    F(Omega/2) minus the constant Laurent term of F at 0.  numeric=True
    computes it by the series + quadrature split instead.
    """
    rho = rho0_laurent(params)
    half = 0.5 * params.omega_real
    if numeric:
        series = (rho + (rho * rho * rho).scale(2.0)) * rho.derivative()

        def func(s):
            r, dr = rho0_eval(s, params)
            return _forcing(r) * dr
        return regularized_integral(func, series, half, params.omega_real / 8.0)
    F = (rho * rho).scale(0.5) + (rho * rho * rho * rho).scale(0.5)
    r_half, _ = rho0_eval(half, params)
    return 0.5 * r_half ** 2 + 0.5 * r_half ** 4 - F[0]


def fp_forcing_p2(params):
    """Finite part of int_0^Omega f p2, twice the half-period value by symmetry."""
    pair = aperiodic_pair(params)
    rho = rho0_laurent(params)
    p1 = rho.derivative()
    q4, _ = linear_series(rho, Laurent(0, np.zeros(1)), 0.0, 1.0)
    series = (rho + (rho * rho * rho).scale(2.0)) * (p1.scale(pair.gamma) + q4.scale(pair.delta))

    def func(s):
        r, _ = rho0_eval(s, params)
        return _forcing(r) * pair.sol(s)[0]
    return 2.0 * regularized_integral(func, series, 0.5 * params.omega_real, pair.split)


def chi_of_tau(tau, eps):
    return eps ** 0.4 * (5.0 / 7.0) * tau ** 1.75


def sigma0_solve(chi_max, params, poles=(), eps=None):
    """Piecewise-linear phase shift sigma0(chi) with sigma0(0) = 0.

    On (chi_k, chi_k+1) the slope is C B_k + FP int_0^Omega f p2 with
    B_k = u* b1_k+ / (14 tau_k) - FP int_0^(Omega/2) f p1.  Segments
    without b1+ use the finite-part term alone.
    """
    pair = aperiodic_pair(params)
    fp2 = fp_forcing_p2(params)
    fp1 = fp_forcing_p1_half(params)
    states = [PhaseShiftState(chi=0.0, sigma0=0.0, sigma0_prime=fp2, k=0)]
    breaks = []
    if eps is not None:
        for p in poles:
            chi_k = chi_of_tau(p.tau_k, eps)
            if 0.0 < chi_k <= chi_max:
                breaks.append((chi_k, p))
    for chi_k, p in sorted(breaks, key=lambda b: b[0]):
        prev = states[-1]
        value = prev.sigma0 + prev.sigma0_prime * (chi_k - prev.chi)
        if math.isnan(p.b1_plus):
            log.warning(f"[{ELLIPTIC}] pole {p.k}: no b1+; phase slope uses the finite-part term only")
            slope = fp2
        else:
            B_k = params.u_star * p.b1_plus / (14.0 * p.tau_k) - fp1
            slope = pair.C * B_k + fp2
        states.append(PhaseShiftState(chi=chi_k, sigma0=value, sigma0_prime=slope, k=p.k))
    return PhaseShiftTable(states=tuple(states), fallback_slope=fp2,
                           meta={'C': pair.C, 'fp_p1_half': fp1, 'fp_p2': fp2})


# ---------------------------------------------------------------------------
# lattice phase and evaluation
# ---------------------------------------------------------------------------

def phase_of_tau(tau):
    return 0.8 * tau ** 1.25


def lattice_phase(poles, params, k_min=5):
    """Circular mean and spread of (4/5) tau_k^(5/4) mod Omega for poles with k >= k_min."""
    omega = params.omega_real
    s = np.array([phase_of_tau(p.tau_k) for p in poles if p.k >= k_min])
    if s.size == 0:
        return 0.0, math.nan
    ang = 2.0 * math.pi * s / omega
    mean = math.atan2(np.mean(np.sin(ang)), np.mean(np.cos(ang)))
    dev = np.angle(np.exp(1j * (ang - mean)))
    offset = mean * omega / (2.0 * math.pi)
    return float(offset), float(np.max(np.abs(dev)) * omega / (2.0 * math.pi))


def elliptic_validity(t, eps, params, offset=0.0, m_pole=M_POLE, tau_min=TAU_MIN, tau_far=TAU_FAR):
    if eps <= 0:
        return ValidityCheck(False, 0.0, "eps > 0")
    tau = InnerScale(eps).tau_of_t(t)
    if tau < tau_min:
        return ValidityCheck(False, tau, f"tau >= {tau_min}")
    if tau * eps ** 0.8 > tau_far:
        return ValidityCheck(False, tau * eps ** 0.8, f"tau eps^(4/5) < {tau_far}")
    omega = params.omega_real
    r = math.fmod(phase_of_tau(tau) - offset, omega)
    dist = min(abs(r), omega - abs(r))
    margin = eps ** -0.2 * dist * tau ** -0.5
    return ValidityCheck(margin > m_pole, margin, f"eps^(-1/5) dist_s tau^(-1/2) > {m_pole}")


def elliptic_leading_eval(t, eps, params, table=None, offset=0.0, m_pole=M_POLE,
                          tau_min=TAU_MIN, tau_far=TAU_FAR):
    """u* + eps^(2/5) sqrt(tau) rho0(s), s = 4/5 tau^(5/4) + sigma0(chi) - offset."""
    check = elliptic_validity(t, eps, params, offset, m_pole, tau_min, tau_far)
    if not check:
        raise OutOfValidity(check.inequality, check.margin)
    tau = InnerScale(eps).tau_of_t(t)
    chi = chi_of_tau(tau, eps)
    sigma0 = table.value(chi) if table is not None else 0.0
    s = phase_of_tau(tau) + sigma0 - offset
    rho, _ = rho0_eval(s, params)
    u = params.u_star + eps ** 0.4 * math.sqrt(tau) * rho
    residual = eps ** 0.4 * tau ** -0.75
    return SolutionSample(t=float(t), u=u, regime=ELLIPTIC, residual=residual, source="elliptic",
                          extra={'tau': tau, 's': s, 'sigma0': sigma0})
