"""Region IV: fast oscillations after the bifurcation (Kuzmak / Whitham averaging).

    u = U0(S(t)/eps + phi(t), t)

U0 runs over the closed orbit of (S')^2 U'^2 = F(U),
F(x) = -x^4 - t x^2 + 2x + E = (alpha - x)(x - beta)((x - m)^2 + n^2).
The energy E(t) keeps the action I0 = 2 int_beta^alpha sqrt(F) dx at 2 pi,
and S' = T / (sqrt(2) J), J = int_beta^alpha dx / sqrt(F).  The constant
T is fixed by S' ~ (t - t*)^(1/4) at the degeneration.
"""
import functools
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from equilibria import CRITICAL, equilibrium_roots
from painleve_errors import (BracketFailure, OutOfRange, OutOfValidity, QuadratureFailure,
                             RootStructureError)
from solution_sample import KUZMAK, SolutionSample, ValidityCheck

log = logging.getLogger(__name__)

U_STAR = CRITICAL.u_star
T_STAR = CRITICAL.t_star
E_STAR = CRITICAL.E_star
TWO_PI = 2.0 * math.pi
M_KUZ = 5.0
A_DEFAULT = 1.0
NEWTON_MAX_ITER = 8
QUAD_TOL = 1e-13
N_REGULARIZE = 1e-4
# below this distance from t* the pinched root pair is not resolved in double precision
ETA_DEGENERATE = 1e-8
_D_ZERO = 1e-14


@dataclass(frozen=True)
class ModulationState:
    t: float
    E: float
    alpha: float
    beta: float
    m: float
    n: float
    S_prime: float = math.nan
    S: float = math.nan
    phi: float = 0.0

    def quartic_coefficients(self):
        """Coefficients (x^4 .. x^0) of (alpha-x)(x-beta)((x-m)^2+n^2)."""
        lin = np.polymul([-1.0, self.alpha], [1.0, -self.beta])
        quadr = [1.0, -2.0 * self.m, self.m ** 2 + self.n ** 2]
        return np.polymul(lin, quadr)


@dataclass(frozen=True)
class DegenerationConstants:
    k: float
    C_star: float
    T: float
    mu1: float
    nu1: float
    gamma1: float

    @property
    def fast_period(self):
        """Period of U0 in the fast variable."""
        return math.sqrt(2.0) * self.T


# ---------------------------------------------------------------------------
# quartic
# ---------------------------------------------------------------------------

def _F(x, t, E):
    return -x ** 4 - t * x * x + 2.0 * x + E


def quartic_factor(t, E):
    """(alpha, beta, m, n) with -x^4 - t x^2 + 2x + E = (alpha-x)(x-beta)((x-m)^2+n^2).

    alpha is the largest real root; the remaining cubic is solved in closed
    form so the pinching pair (m +- in near beta) stays accurate.

    Raises:
        RootStructureError: the quartic does not have exactly two real roots.
    """
    roots = np.roots([-1.0, 0.0, -t, 2.0, E])
    real = [r.real for r in roots if abs(r.imag) <= 1e-6 * (1.0 + abs(r))]
    if not real:
        raise RootStructureError(f"no real roots at t={t}, E={E}")
    alpha = max(real)
    for _ in range(3):
        d = -4.0 * alpha ** 3 - 2.0 * t * alpha + 2.0
        if d == 0.0:
            break
        alpha -= _F(alpha, t, E) / d
    p2, p1, p0 = alpha, alpha * alpha + t, alpha ** 3 + t * alpha - 2.0
    p = p1 - p2 * p2 / 3.0
    q = 2.0 * p2 ** 3 / 27.0 - p2 * p1 / 3.0 + p0
    D = (0.5 * q) ** 2 + (p / 3.0) ** 3
    if D < -_D_ZERO:
        raise RootStructureError(f"four real roots at t={t}, E={E}")
    sD = math.sqrt(max(D, 0.0))
    A = float(np.cbrt(-0.5 * q + sD))
    B = float(np.cbrt(-0.5 * q - sD))
    y = A + B
    beta = y - p2 / 3.0
    m = -0.5 * y - p2 / 3.0
    n = 0.5 * math.sqrt(3.0) * abs(A - B)
    if beta >= alpha:
        raise RootStructureError(f"root ordering failed at t={t}, E={E}: beta={beta} alpha={alpha}")
    return alpha, beta, m, n


def _sin2(phi, alpha, beta):
    return beta + (alpha - beta) * math.sin(phi) ** 2


def action_I0(t, E, n_nodes=None, quad_tol=QUAD_TOL):
    """2 int_beta^alpha sqrt(F) dx with x = beta + (alpha-beta) sin^2(phi)."""
    alpha, beta, m, n = quartic_factor(t, E)
    L = alpha - beta

    def integrand(phi):
        s, c = math.sin(phi), math.cos(phi)
        x = beta + L * s * s
        return 4.0 * L * L * s * s * c * c * math.sqrt((x - m) ** 2 + n * n)

    if n_nodes is not None:
        xg, wg = np.polynomial.legendre.leggauss(n_nodes)
        phi = 0.25 * math.pi * (xg + 1.0)
        return 0.25 * math.pi * float(sum(w * integrand(p) for p, w in zip(phi, wg)))
    val, err = quad(integrand, 0.0, 0.5 * math.pi, epsabs=0.1 * quad_tol, epsrel=quad_tol, limit=200)
    if err > max(1e-10, 1e3 * quad_tol):
        raise QuadratureFailure(f"action integral error estimate {err:.2e}")
    return val


def _pinch_angle(alpha, beta, m, n):
    frac = max(m - beta, n, 0.0) / (alpha - beta)
    return math.asin(min(1.0, math.sqrt(frac)))


def period_J(t, E, regularize=True, roots=None, quad_tol=QUAD_TOL):
    """int_beta^alpha dx / sqrt(F), which is dI0/dE.

    For n below N_REGULARIZE the pinched integral is replaced by its
    leading degenerate form C*(k) / sqrt(n (alpha - beta)), k = (m - beta)/n.
    """
    alpha, beta, m, n = roots or quartic_factor(t, E)
    if regularize and n < N_REGULARIZE:
        k = (m - beta) / n if n > 0 else 0.0
        if n == 0:
            raise QuadratureFailure(f"period diverges at t={t}: the inner pair has pinched")
        return c_star(k) / math.sqrt(n * (alpha - beta))
    L = alpha - beta

    def integrand(phi):
        x = beta + L * math.sin(phi) ** 2
        return 2.0 / math.sqrt((x - m) ** 2 + n * n)

    phi_m = _pinch_angle(alpha, beta, m, n)
    pts = sorted({min(v, 0.5 * math.pi * 0.999) for v in (0.5 * phi_m, phi_m, 2.0 * phi_m, 4.0 * phi_m) if v > 0})
    val, err = quad(integrand, 0.0, 0.5 * math.pi, points=pts or None, epsabs=quad_tol,
                   epsrel=10.0 * quad_tol, limit=400)
    if err > max(1e-8, 1e5 * quad_tol) * max(1.0, val):
        raise QuadratureFailure(f"period integral error estimate {err:.2e} at t={t}")
    return val


def energy_floor(t):
    """Minimum of V(x) = x^4 + t x^2 - 2x for t > t*, where the orbit shrinks to a point."""
    x0 = equilibrium_roots(t).roots[-1]
    return x0 ** 4 + t * x0 * x0 - 2.0 * x0


def _solve_E(t, E_guess=None, tol=1e-12, max_iter=60, quad_tol=QUAD_TOL):
    if t <= T_STAR:
        raise BracketFailure(f"solve_E needs t > t* = {T_STAR}, got {t}")
    lo = energy_floor(t)
    hi = math.inf
    E = E_guess if E_guess is not None else E_STAR + U_STAR ** 2 * (t - T_STAR)
    if E <= lo:
        E = lo + 0.5 * abs(E_STAR - lo)
    for it in range(1, max_iter + 1):
        r = action_I0(t, E, quad_tol=quad_tol) - TWO_PI
        if abs(r) < tol:
            return E, it
        if r < 0:
            lo = max(lo, E)
        else:
            hi = min(hi, E)
        E_new = E - r / period_J(t, E, quad_tol=quad_tol)
        if not (lo < E_new < hi):
            E_new = 0.5 * (lo + hi) if math.isfinite(hi) else E + 2.0 * abs(r)
        E = E_new
    raise BracketFailure(f"Newton for E did not converge at t={t} after {max_iter} iterations")


def _state(t, E):
    alpha, beta, m, n = quartic_factor(t, E)
    return ModulationState(t=float(t), E=E, alpha=alpha, beta=beta, m=m, n=n)


def solve_E(t, E_guess=None, tol=1e-12, quad_tol=QUAD_TOL):
    """Energy with I0(t, E) = 2 pi, by Newton safeguarded with a bracket.

    Raises:
        BracketFailure: t <= t* or no convergence.
        RootStructureError: from the root factorization.
    """
    E, it = _solve_E(t, E_guess, tol, quad_tol=quad_tol)
    if it > NEWTON_MAX_ITER:
        log.warning(f"solve_E at t={t:.6f} took {it} Newton iterations")
    return _state(t, E)


def continue_E(t, t_prev, E_prev, newton_max_iter=NEWTON_MAX_ITER, quad_tol=QUAD_TOL,
               tol=1e-12, min_step=1e-10):
    """Energy at t continued from a solved (t_prev, E_prev).

    Newton gets newton_max_iter iterations; when that is not enough the step
    is halved through the midpoint.  Below min_step the unbounded solve runs.
    """
    try:
        E, _ = _solve_E(t, E_prev, tol, max_iter=newton_max_iter, quad_tol=quad_tol)
        return _state(t, E)
    except BracketFailure:
        if abs(t - t_prev) < min_step:
            return solve_E(t, E_prev, tol, quad_tol=quad_tol)
    mid = 0.5 * (t + t_prev)
    log.debug(f"E continuation: halving step {t_prev:.6f} -> {t:.6f} at {mid:.6f}")
    half = continue_E(mid, t_prev, E_prev, newton_max_iter, quad_tol, tol, min_step)
    return continue_E(t, mid, half.E, newton_max_iter, quad_tol, tol, min_step)


# ---------------------------------------------------------------------------
# degeneration constants
# ---------------------------------------------------------------------------

def _gauss(f, a, b, n_nodes):
    xg, wg = np.polynomial.legendre.leggauss(n_nodes)
    x = 0.5 * (b - a) * xg + 0.5 * (a + b)
    return 0.5 * (b - a) * float(np.sum(wg * f(x)))


def c_of_k(k, n_nodes=None):
    """-(8/5) int_0^inf (-k y + k^2 + 1) y^(5/2) / ((y - k)^2 + 1)^(5/2) dy.

    Split at y = 10; y = s^2 on the head and y = 1/w^2 on the tail make both
    pieces smooth.  With n_nodes both are summed by Gauss-Legendre.
    """
    def head(s):
        y = s * s
        return 2.0 * (-k * y + k * k + 1.0) * s ** 6 / ((y - k) ** 2 + 1.0) ** 2.5

    def tail(w):
        w2 = w * w
        return 2.0 * (-k + (k * k + 1.0) * w2) / ((1.0 - k * w2) ** 2 + w2 * w2) ** 2.5

    s_max, w_max = math.sqrt(10.0), 1.0 / math.sqrt(10.0)
    if n_nodes is not None:
        total = _gauss(head, 0.0, s_max, n_nodes) + _gauss(tail, 0.0, w_max, n_nodes)
    else:
        h, e1 = quad(head, 0.0, s_max, epsabs=1e-14, epsrel=1e-13, limit=200)
        tl, e2 = quad(tail, 0.0, w_max, epsabs=1e-14, epsrel=1e-13, limit=200)
        if e1 + e2 > 1e-11:
            raise QuadratureFailure(f"c(k) quadrature error {e1 + e2:.2e}")
        total = h + tl
    return -1.6 * total


def c_star(k, plus=False, n_nodes=None):
    """int_0^inf dy / sqrt(y ((y -+ k)^2 + 1)); plus=True uses (y + k)."""
    kk = -k if plus else k

    def head(s):
        return 2.0 / np.sqrt((s * s - kk) ** 2 + 1.0)

    def tail(w):
        w2 = w * w
        return 2.0 / np.sqrt((1.0 - kk * w2) ** 2 + w2 * w2)

    if n_nodes is not None:
        return _gauss(head, 0.0, 2.0, n_nodes) + _gauss(tail, 0.0, 0.5, n_nodes)
    h, e1 = quad(head, 0.0, 2.0, epsabs=1e-14, epsrel=1e-13)
    tl, e2 = quad(tail, 0.0, 0.5, epsabs=1e-14, epsrel=1e-13)
    if e1 + e2 > 1e-10:
        raise QuadratureFailure(f"C*(k) quadrature error {e1 + e2:.2e}")
    return h + tl


@functools.lru_cache(maxsize=1)
def solve_k():
    """Root of c(k) on [0.3, 0.6] and the constants that follow from it.

    Raises:
        BracketFailure: c(k) does not change sign on the bracket.
    """
    lo, hi = 0.3, 0.6
    if c_of_k(lo) * c_of_k(hi) > 0:
        raise BracketFailure("c(k) has no sign change on [0.3, 0.6]")
    k = brentq(c_of_k, lo, hi, xtol=1e-15, rtol=1e-15)
    nu1 = math.sqrt(3.0 / (2.0 * (3.0 - k * k)))
    cs = c_star(k)
    T = math.sqrt(2.0) * cs / (2.0 * math.sqrt(abs(U_STAR))) * ((6.0 - 2.0 * k * k) / 3.0) ** 0.25
    consts = DegenerationConstants(k=k, C_star=cs, T=T, mu1=k * nu1 / 3.0, nu1=nu1,
                                   gamma1=U_STAR ** 2)
    log.info(f"degeneration constants: k={k:.12f} C*={cs:.10f} T={T:.10f}")
    return consts


def I_k_delta(k, delta):
    """int_0^1 sqrt(z (1 - z)) sqrt((z - k delta)^2 + delta^2) dz."""
    def integrand(phi):
        z = math.sin(phi) ** 2
        return 2.0 * z * math.cos(phi) ** 2 * math.sqrt((z - k * delta) ** 2 + delta * delta)

    pts = [math.asin(math.sqrt(min(1.0, max(k, 1.0) * delta * f))) for f in (0.5, 1.0, 2.0, 8.0)]
    val, _ = quad(integrand, 0.0, 0.5 * math.pi, points=pts, epsabs=1e-15, epsrel=1e-14, limit=400)
    return val


def I_small_delta(k, delta):
    return (math.pi / 16.0 - k * delta * math.pi / 8.0 + delta * delta * math.pi / 4.0
            + c_of_k(k) * delta ** 2.5)


# ---------------------------------------------------------------------------
# phase
# ---------------------------------------------------------------------------

def S_prime_of(state, constants, quad_tol=QUAD_TOL):
    J = period_J(state.t, state.E, roots=(state.alpha, state.beta, state.m, state.n), quad_tol=quad_tol)
    return constants.T / (math.sqrt(2.0) * J)


def _dS_prime_dE(state, constants, quad_tol=QUAD_TOL):
    h = 1e-6 * max(1.0, abs(state.E))
    jp = period_J(state.t, state.E + h, quad_tol=quad_tol)
    jm = period_J(state.t, state.E - h, quad_tol=quad_tol)
    J = period_J(state.t, state.E, quad_tol=quad_tol)
    return -constants.T / math.sqrt(2.0) * (jp - jm) / (2.0 * h) / (J * J)


@dataclass(frozen=True)
class ModulationTable:
    states: tuple
    constants: DegenerationConstants
    phase_a: float = 0.0
    phi0: float = 0.0
    quad_tol: float = QUAD_TOL
    _splines: dict = field(default_factory=dict, compare=False, repr=False)

    def _spline(self, key):
        if key not in self._splines:
            r = np.array([0.0] + [(s.t - T_STAR) ** 0.25 for s in self.states])
            start = {'S': 0.0, 'E': E_STAR, 'phi': self.phi0}[key]
            y = np.array([start] + [getattr(s, key) for s in self.states])
            self._splines[key] = CubicSpline(r, y)
        return self._splines[key]

    @property
    def t_max(self):
        return self.states[-1].t

    def state_at(self, t):
        """Full modulation state at t from the tabulated S and phi and a fresh energy solve."""
        if not T_STAR < t <= self.t_max:
            raise OutOfRange(f"t={t} outside the modulation table (t*, {self.t_max}]")
        r = (t - T_STAR) ** 0.25
        st = solve_E(t, float(self._spline('E')(r)), quad_tol=self.quad_tol)
        st = replace(st, S_prime=S_prime_of(st, self.constants, self.quad_tol),
                     S=float(self._spline('S')(r)), phi=float(self._spline('phi')(r)))
        return st


def solve_phase(t_grid, constants=None, phase_a=0.0, phi0=0.0, gauss_points=8,
                newton_max_iter=NEWTON_MAX_ITER, quad_tol=QUAD_TOL):
    """Sweeps E(t) over an ascending grid and integrates S' and phi' from t*.

    S(t*) = 0.  Integration runs in r = (t - t*)^(1/4), where S' dt =
    4 r^3 S' dr is smooth at the degeneration.  phi' = a dS'/dE / J.
    E is continued node to node with continue_E.
    """
    constants = constants or solve_k()
    t_grid = np.asarray(sorted(t_grid), dtype=float)
    if t_grid.size == 0 or t_grid[0] <= T_STAR:
        raise ValueError("t_grid must be non-empty and above t*")
    xg, wg = np.polynomial.legendre.leggauss(gauss_points)
    S, phi, r_prev = 0.0, phi0, 0.0
    t_prev, E_prev = None, None
    states = []

    def advance(t):
        nonlocal t_prev, E_prev
        if E_prev is None:
            st = solve_E(t, quad_tol=quad_tol)
        else:
            st = continue_E(t, t_prev, E_prev, newton_max_iter, quad_tol)
        t_prev, E_prev = st.t, st.E
        return st

    for t in t_grid:
        r = (t - T_STAR) ** 0.25
        for x, w in zip(xg, wg):
            rn = 0.5 * (r - r_prev) * x + 0.5 * (r + r_prev)
            weight = 0.5 * (r - r_prev) * w * 4.0 * rn ** 3
            if rn ** 4 < ETA_DEGENERATE:
                S += weight * rn
                continue
            st = advance(T_STAR + rn ** 4)
            S += weight * S_prime_of(st, constants, quad_tol)
            if phase_a:
                J = period_J(st.t, st.E, quad_tol=quad_tol)
                phi += weight * phase_a * _dS_prime_dE(st, constants, quad_tol) / J
        st = advance(t)
        states.append(replace(st, S_prime=S_prime_of(st, constants, quad_tol), S=S, phi=phi))
        r_prev = r
    log.info(f"phase table: {len(states)} states on ({T_STAR:.6f}, {t_grid[-1]:.6f}]")
    return ModulationTable(states=tuple(states), constants=constants, phase_a=phase_a, phi0=phi0,
                           quad_tol=quad_tol)


@functools.lru_cache(maxsize=4)
def default_table(t_max=T_STAR + A_DEFAULT, points=120, phase_a=0.0, newton_max_iter=NEWTON_MAX_ITER,
                  quad_tol=QUAD_TOL):
    eta = np.geomspace(1e-6, t_max - T_STAR, points)
    return solve_phase(T_STAR + eta, phase_a=phase_a, newton_max_iter=newton_max_iter, quad_tol=quad_tol)


# ---------------------------------------------------------------------------
# leading term
# ---------------------------------------------------------------------------

def _elapsed(phi_u, state):
    # S' int_beta^U dx/sqrt(F) with U = beta + (alpha-beta) sin^2(phi_u)
    L = state.alpha - state.beta

    def integrand(phi):
        x = state.beta + L * math.sin(phi) ** 2
        return 2.0 / math.sqrt((x - state.m) ** 2 + state.n ** 2)

    val, _ = quad(integrand, 0.0, phi_u, epsabs=1e-13, epsrel=1e-12, limit=200)
    return state.S_prime * val


def leading_U0(t1, state, constants=None):
    """U0 at fast time t1; U0(0) = beta, U0(half period) = alpha.

    Raises:
        OutOfRange: t1 is not finite.
    """
    constants = constants or solve_k()
    if not math.isfinite(t1):
        raise OutOfRange(f"fast time t1={t1} cannot be reduced")
    if math.isnan(state.S_prime):
        state = replace(state, S_prime=S_prime_of(state, constants))
    P = constants.fast_period
    half = _elapsed(0.5 * math.pi, state)
    r = math.fmod(t1, P)
    if r < 0:
        r += P
    if r > 0.5 * P:
        r = P - r
    # half equals P/2 up to quadrature error
    r = min(r * 2.0 * half / P, half)
    if r <= 0.0:
        return state.beta
    if r >= half:
        return state.alpha
    phi_u = brentq(lambda p: _elapsed(p, state) - r, 0.0, 0.5 * math.pi, xtol=1e-14)
    return _sin2(phi_u, state.alpha, state.beta)


def degenerate_profile(t1, state, constants=None):
    """u* + W0((t1 - P/2) / S'), the separatrix limit of U0 over one fast period."""
    constants = constants or solve_k()
    if math.isnan(state.S_prime):
        state = replace(state, S_prime=S_prime_of(state, constants))
    P = constants.fast_period
    r = math.fmod(t1, P)
    if r < 0:
        r += P
    x = (r - 0.5 * P) / state.S_prime
    return U_STAR - 4.0 * U_STAR / (1.0 + 4.0 * U_STAR ** 2 * x * x)


def first_correction_order(t, eps):
    """eps U1 / U0 ~ eps (t - t*)^(-3/2)."""
    return eps * (t - T_STAR) ** -1.5


def kuzmak_residual(t, eps):
    eta = t - T_STAR
    return eps ** 2 * eta ** -2.75 + eps ** 3 * eta ** -4.25


def kuzmak_validity(t, eps, m_kuz=M_KUZ, a_default=A_DEFAULT):
    if eps <= 0:
        return ValidityCheck(False, 0.0, "eps > 0")
    eta = t - T_STAR
    margin = eta * eps ** (-2.0 / 3.0) if eta > 0 else 0.0
    if t > T_STAR + a_default:
        return ValidityCheck(False, margin, f"t <= t* + {a_default}")
    ratio = first_correction_order(t, eps) if eta > 0 else math.inf
    return ValidityCheck(margin > m_kuz, margin,
                         f"(t-t*)*eps^(-2/3) > {m_kuz} (eps U1/U0 = {ratio:.3g})")


def kuzmak_eval(t, eps, table=None, m_kuz=M_KUZ, a_default=A_DEFAULT):
    check = kuzmak_validity(t, eps, m_kuz, a_default)
    if not check:
        raise OutOfValidity(check.inequality, check.margin)
    table = table or default_table(T_STAR + a_default)
    state = table.state_at(t)
    t1 = state.S / eps + state.phi
    u = leading_U0(t1, state, table.constants)
    return SolutionSample(t=float(t), u=u, regime=KUZMAK, residual=kuzmak_residual(t, eps),
                          source="kuzmak",
                          extra={'E': state.E, 'alpha': state.alpha, 'beta': state.beta,
                                 'S': state.S, 'correction_order': first_correction_order(t, eps)})
