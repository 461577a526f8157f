"""Region II: the Painleve-1 transition layer.

    u = u* + eps^(2/5) v0(tau) + eps^(4/5) v1(tau),   t = t* + eps^(4/5) tau

    v0'' + 6u* v0^2 + u* tau = 0                        (P1, tritronquee branch)
    v1'' + 12u* v0 v1 = -2 v0^3 - tau v0                (linearized, forced)

v0 is integrated from its algebraic branch at tau -> -inf through its real
double poles.  At each pole the integrator stops at |v0| = V_max, fits the
Laurent data (tau_k, c_k), and restarts just past the pole from the Laurent
series.  The v1 pass projects v1 onto the local basis around each pole to
read off the connection constants (a1, b1) and restarts with the jump of b1.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares

from equilibria import CRITICAL
from laurent_series import Laurent
from painleve_errors import (OutOfRange, OutOfValidity, PoleFitFailure,
                             ProjectionIllConditioned, SeedOutOfRange,
                             ToleranceFailure)
from solution_sample import PAINLEVE, SolutionSample, ValidityCheck

log = logging.getLogger(__name__)

U_STAR = CRITICAL.u_star
LAURENT_ORDER = 30
V_MAX = 1e6
N_POLES = 8
W_POLE_SCALE = 0.125
FIT_V_MIN = 10.0
FIT_X_MAX = 0.45
FIT_THRESHOLD = 1e-6
SEED_LIMIT = -10.0
M_POLE = 5.0
TAU_FAR = 0.2
PROJECTION_POINTS = 12
MAX_COND = 1e12


@dataclass(frozen=True)
class PoleData:
    k: int
    tau_k: float
    c_k: float
    a1_minus: float = math.nan
    b1_minus: float = math.nan
    a1_plus: float = math.nan
    b1_plus: float = math.nan
    fit_residual: float = math.nan
    # right-hand projection of the restarted v1, a check on the restart
    a1_plus_measured: float = math.nan
    b1_plus_measured: float = math.nan

    @property
    def has_correction(self):
        return not math.isnan(self.b1_minus)


@dataclass(frozen=True)
class InnerScale:
    eps: float

    def t_of_tau(self, tau):
        return CRITICAL.t_star + self.eps ** 0.8 * tau

    def tau_of_t(self, t):
        return (t - CRITICAL.t_star) * self.eps ** -0.8

    def u_of_v(self, v):
        return CRITICAL.u_star + self.eps ** 0.4 * v

    def v_of_u(self, u):
        return (u - CRITICAL.u_star) * self.eps ** -0.4


@dataclass(frozen=True)
class _Segment:
    lo: float
    hi: float
    sol: object


@dataclass(frozen=True)
class P1Trajectory:
    samples: tuple
    poles: tuple
    seed_tau: float
    tol: float
    segments: tuple = field(default=(), repr=False)
    v1_segments: tuple = field(default=(), repr=False)
    end_tau: float = math.nan

    def _segment(self, segments, tau):
        for seg in segments:
            if seg.lo <= tau <= seg.hi:
                return seg
        return None

    def _nearest_pole(self, tau):
        if not self.poles:
            return None
        return min(self.poles, key=lambda p: abs(tau - p.tau_k))

    def v0(self, tau, derivative=False):
        """v0 (or v0') at tau: dense output, Laurent series inside pole windows, far field before the seed."""
        if tau < self.seed_tau:
            return far_field_v0(tau, derivative)
        if tau > self.end_tau:
            raise OutOfRange(f"tau={tau} beyond integrated range {self.end_tau}")
        seg = self._segment(self.segments, tau)
        if seg is not None:
            return float(seg.sol(tau)[1 if derivative else 0])
        pole = self._nearest_pole(tau)
        L = laurent_v0(pole.tau_k, pole.c_k)
        if derivative:
            L = L.derivative()
        return float(L(tau - pole.tau_k))

    def v1(self, tau, derivative=False):
        if not self.v1_segments:
            raise OutOfRange("first correction not computed; call first_correction()")
        if tau < self.seed_tau:
            return far_field_v1(tau, derivative)
        if tau > self.end_tau:
            raise OutOfRange(f"tau={tau} beyond integrated range {self.end_tau}")
        seg = self._segment(self.v1_segments, tau)
        if seg is not None:
            return float(seg.sol(tau)[3 if derivative else 2])
        pole = self._nearest_pole(tau)
        x = tau - pole.tau_k
        side = pole.b1_minus if x < 0 else pole.b1_plus
        L = v1_local(pole, pole.a1_minus, side)
        if derivative:
            L = L.derivative()
        return float(L(x))


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------

def laurent_v0(tau_k, c_k, order=LAURENT_ORDER, a2=None):
    """Laurent series of v0 about a pole: -1/(u* x^2) + tau_k u*/10 x^2 + u*/6 x^3 + c_k x^4 + ...

    Args:
        tau_k (float): pole location.
        c_k (float): the free x^4 coefficient.
        a2 (float, optional): overrides the x^2 coefficient (fit diagnostics).
    """
    c = U_STAR
    a = np.zeros(order + 3)
    a[0] = -1.0 / c
    for n in range(-1, order + 1):
        if n == 4:
            a[n + 2] = c_k
            continue
        if n == 2 and a2 is not None:
            a[n + 2] = a2
            continue
        s = 0.0
        for i in range(-1, n):
            s += a[i + 2] * a[n - 2 - i + 2]
        rhs = 6.0 * c * s + (c * tau_k if n == 2 else 0.0) + (c if n == 3 else 0.0)
        a[n + 2] = -rhs / ((n - 4) * (n + 3))
    return Laurent(-2, a)


def linear_series(v0, g, y_m3=0.0, y4=0.0):
    """Series solution of y'' + 12u* v0 y = g around a pole of v0.

    The exponents -3 and 4 are free (y_m3, y4); everything else follows from
    the recursion.  Returns (series, solvability defect at x^2).
    """
    c = U_STAR
    # a zero forcing must not cap the series below the free x^4 slot
    hi = min(g.hi + 2, v0.hi + 2) if g.coeffs.any() else v0.hi + 2
    y = np.zeros(hi + 5)  # y[n + 4], n = -4..hi
    defect = 0.0
    for n in range(-4, hi + 1):
        s = 0.0
        for i in range(max(-1, v0.lo), n + 3):
            j = n - 2 - i
            if j < -4 or j >= n:
                continue
            s += v0[i] * y[j + 4]
        rhs = g[n - 2] - 12.0 * c * s
        if n == -3:
            y[n + 4] = y_m3
        elif n == 4:
            y[n + 4] = y4
            defect = rhs
        else:
            y[n + 4] = rhs / (n * (n - 1) - 12)
    return Laurent(-4, y), defect


def v1_forcing(v0, tau_k):
    """-(tau_k + x) v0 - 2 v0^3 as a Laurent series in x."""
    x_v0 = Laurent(v0.lo + 1, v0.coeffs)
    return -(v0.scale(tau_k) + x_v0) - (v0 * v0 * v0).scale(2.0)


def v1_basis(tau_k, c_k):
    """Particular solution and the homogeneous pair (1/x^3 type, x^4 type) around a pole."""
    v0 = laurent_v0(tau_k, c_k)
    part, defect = linear_series(v0, v1_forcing(v0, tau_k), 0.0, 0.0)
    if abs(defect) > 1e-8 * max(1.0, abs(tau_k)) ** 2:
        log.warning(f"v1 series at tau_k={tau_k:.6f}: x^4 solvability defect {defect:.3e}")
    zero = Laurent(0, np.zeros(1))
    hom1, _ = linear_series(v0, zero, 1.0, 0.0)
    hom2, _ = linear_series(v0, zero, 0.0, 1.0)
    return part, hom1, hom2


def v1_local(pole, a1, b1):
    part, hom1, hom2 = v1_basis(pole.tau_k, pole.c_k)
    return part + hom1.scale(a1) + hom2.scale(b1)


def jump_delta(tau_k):
    """Jump of the x^4 coefficient of v1 across a pole."""
    return -22.0 * U_STAR ** 3 * tau_k ** 2 / 75.0


# ---------------------------------------------------------------------------
# far field
# ---------------------------------------------------------------------------

def far_field_v0(tau, derivative=False):
    c = U_STAR
    m = -tau
    if derivative:
        return (1.0 / (12.0 * math.sqrt(m / 6.0)) - 1.0 / (24.0 * c * tau ** 3)
                + 4.5 * 49.0 / (768.0 * math.sqrt(6.0) * c * c) * m ** -5.5)
    return (-math.sqrt(m / 6.0) + 1.0 / (48.0 * c * tau * tau)
            + 49.0 / (768.0 * math.sqrt(6.0) * c * c) * m ** -4.5)


def far_field_v1(tau, derivative=False):
    c = U_STAR
    m = -tau
    k = 1.0 / (144.0 * math.sqrt(6.0) * c * c)
    if derivative:
        return -1.0 / (18.0 * c) + 1.5 * k * m ** -2.5
    return -tau / (18.0 * c) + k * m ** -1.5


def p1_seed(tau0):
    """Initial (v, v') on the algebraic branch v ~ -sqrt(-tau/6)."""
    if tau0 > SEED_LIMIT:
        raise SeedOutOfRange(f"seed needs tau0 <= {SEED_LIMIT}, got {tau0}")
    return far_field_v0(tau0), far_field_v0(tau0, derivative=True)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def _p1_rhs(tau, y):
    return [y[1], -6.0 * U_STAR * y[0] * y[0] - U_STAR * tau]


def _p1_linear_rhs(tau, y):
    v0, dv0, v1, dv1 = y
    c = U_STAR
    return [dv0, -6.0 * c * v0 * v0 - c * tau,
            dv1, -12.0 * c * v0 * v1 - 2.0 * v0 ** 3 - tau * v0]


def _blowup_event(v_max):
    def event(tau, y):
        return y[0] - v_max
    event.terminal = True
    event.direction = 1
    return event


def p1_residual(tau, v, dv=None, d2v=None):
    """|v'' + 6u* v^2 + u* tau| given a second derivative (or 0 when it is computed from the ODE)."""
    if d2v is None:
        return 0.0
    return abs(d2v + 6.0 * U_STAR * v * v + U_STAR * tau)


def pole_window(tau_k, w_scale=W_POLE_SCALE):
    return w_scale * max(abs(tau_k), 1.0) ** -0.2


def _fit_window(sol, lo, tau_hit, v_max, fit_v_min, fit_x_max):
    """Dense samples on the approach to a pole for the Laurent fit."""
    tau_guess = tau_hit + 1.0 / math.sqrt(abs(U_STAR) * v_max)
    x_max = fit_x_max * max(1.0, abs(tau_guess) / 2.5) ** -0.25
    d_min = tau_guess - tau_hit
    dist = np.geomspace(max(x_max, 2 * d_min), d_min, 80)
    taus = tau_guess - dist
    taus = taus[(taus >= lo) & (taus <= tau_hit)]
    vs = sol(taus)[0]
    keep = vs >= fit_v_min
    return taus[keep], vs[keep], tau_guess


def locate_pole(taus, vs, tau_guess=None, free_quadratic=False, k=0,
                threshold=FIT_THRESHOLD):
    """Least-squares fit of (tau_k, c_k) to samples approaching a pole.

    Residuals are weighted by (tau - tau_k)^2 so that every sample counts
    equally against the 1/x^2 growth.  With free_quadratic=True the x^2
    coefficient is also fitted; it is returned in the `a1_minus` slot.

    Raises:
        PoleFitFailure: fewer than 5 samples, solver failure, or residual above threshold.
    """
    taus = np.asarray(taus, dtype=float)
    vs = np.asarray(vs, dtype=float)
    if taus.size < 5:
        raise PoleFitFailure(f"pole fit needs at least 5 samples, got {taus.size}")
    if tau_guess is None:
        order = np.argsort(-np.abs(vs))[: max(3, taus.size // 4)]
        slope, icpt = np.polyfit(taus[order], 1.0 / np.sqrt(np.abs(vs[order])), 1)
        tau_guess = -icpt / slope

    def model(p):
        a2 = p[2] if free_quadratic else None
        return laurent_v0(p[0], p[1], a2=a2)(taus - p[0])

    def resid(p):
        x = taus - p[0]
        return (vs - model(p)) * x * x

    p0 = [tau_guess, 0.0] + ([U_STAR * tau_guess / 10.0] if free_quadratic else [])
    try:
        fit = least_squares(resid, p0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    except ValueError as e:
        raise PoleFitFailure(f"pole fit failed: {e}") from e
    fit_residual = float(np.sqrt(np.mean(fit.fun ** 2)))
    if not fit.success or not np.isfinite(fit_residual) or fit_residual > threshold:
        raise PoleFitFailure(f"pole fit residual {fit_residual:.3e} above {threshold:.1e} ({fit.message})")
    extra = float(fit.x[2]) if free_quadratic else math.nan
    log.info(f"pole {k}: tau_k={fit.x[0]:.12f} c_k={fit.x[1]:.10f} residual={fit_residual:.2e}")
    return PoleData(k=k, tau_k=float(fit.x[0]), c_k=float(fit.x[1]),
                    a1_minus=extra, fit_residual=fit_residual)


def integrate_p1(tau0=-30.0, tau1=None, tol=1e-11, n_poles=N_POLES, v_max=V_MAX,
                 w_scale=W_POLE_SCALE, fit_v_min=FIT_V_MIN, fit_x_max=FIT_X_MAX,
                 fit_threshold=FIT_THRESHOLD, max_span=80.0):
    """Integrates the tritronquee P1 solution from tau0 through its real poles.

    Stops at tau1 or after n_poles poles, whichever comes first.

    Raises:
        ToleranceFailure: the integrator gave up.
        PoleFitFailure: a pole could not be fitted.
    """
    if tau1 is not None and tau1 <= tau0:
        raise ValueError(f"tau1={tau1} must exceed tau0={tau0}")
    y = list(p1_seed(tau0))
    start = tau0
    end = tau1 if tau1 is not None else tau0 + max_span
    segments, poles, samples = [], [], []
    while start < end:
        sol = solve_ivp(_p1_rhs, (start, end), y, method='DOP853', rtol=tol, atol=tol,
                        dense_output=True, events=_blowup_event(v_max))
        if sol.status == -1:
            raise ToleranceFailure(f"P1 integration failed at tau={sol.t[-1]}: {sol.message}")
        hi = float(sol.t[-1])
        segments.append(_Segment(start, hi, sol.sol))
        samples.extend(zip(sol.t, sol.y[0], sol.y[1]))
        if sol.status != 1:
            break
        taus, vs, guess = _fit_window(sol.sol, start, hi, v_max, fit_v_min, fit_x_max)
        pole = locate_pole(taus, vs, guess, k=len(poles) + 1, threshold=fit_threshold)
        poles.append(pole)
        if len(poles) >= n_poles:
            end = hi
            break
        w = pole_window(pole.tau_k, w_scale)
        L = laurent_v0(pole.tau_k, pole.c_k)
        start = pole.tau_k + w
        y = [float(L(w)), float(L.derivative()(w))]
    windows = [(p.tau_k, pole_window(p.tau_k, w_scale)) for p in poles]
    kept = tuple(s for s in samples if all(abs(s[0] - tk) >= w for tk, w in windows))
    return P1Trajectory(samples=kept, poles=tuple(poles), seed_tau=tau0, tol=tol,
                        segments=tuple(segments), end_tau=min(end, segments[-1].hi))


# ---------------------------------------------------------------------------
# first correction
# ---------------------------------------------------------------------------

def _project(x, data, part, hom1, hom2):
    """Least squares for (a, b) in data - part = a*hom1 + b*hom2 on collocation points x."""
    A = np.column_stack([hom1(x), hom2(x)])
    scale = np.linalg.norm(A, axis=0)
    if not np.all(np.isfinite(scale)) or np.any(scale == 0.0):
        raise ProjectionIllConditioned(f"projection basis has a degenerate column (norms {scale})")
    As = A / scale
    cond = np.linalg.cond(As)
    if not np.isfinite(cond) or cond > MAX_COND:
        raise ProjectionIllConditioned(f"projection basis condition number {cond:.3e}")
    coef, *_ = np.linalg.lstsq(As, data - part(x), rcond=None)
    coef = coef / scale
    return float(coef[0]), float(coef[1])


def first_correction(trajectory, tol=None, w_scale=W_POLE_SCALE):
    """Integrates v1 along the trajectory and attaches (a1, b1) connection data to each pole.

    Left of pole k the solution is projected on {v1_c, x^-3 type, x^4 type}
    in the annulus 2w < |x| < 4w; the restart right of the pole uses
    a1+ = a1- and b1+ = b1- + jump_delta(tau_k).
    """
    tol = tol or trajectory.tol
    tau = trajectory.seed_tau
    y = [far_field_v0(tau), far_field_v0(tau, True), far_field_v1(tau), far_field_v1(tau, True)]
    segments, poles = [], []
    start = tau
    pending = None
    for pole in list(trajectory.poles) + [None]:
        w = pole_window(pole.tau_k, w_scale) if pole else 0.0
        end = pole.tau_k - 2.0 * w if pole else trajectory.end_tau
        if end <= start:
            break
        sol = solve_ivp(_p1_linear_rhs, (start, end), y, method='DOP853', rtol=tol, atol=tol,
                        dense_output=True)
        if sol.status == -1:
            raise ToleranceFailure(f"v1 integration failed at tau={sol.t[-1]}: {sol.message}")
        segments.append(_Segment(start, end, sol.sol))
        if pending is not None:
            prev, pw = pending
            x = np.linspace(2.0 * pw, 4.0 * pw, PROJECTION_POINTS)
            part, hom1, hom2 = v1_basis(prev.tau_k, prev.c_k)
            a_m, b_m = _project(x, sol.sol(prev.tau_k + x)[2], part, hom1, hom2)
            poles[-1] = replace(poles[-1], a1_plus_measured=a_m, b1_plus_measured=b_m)
        if pole is None:
            break
        x = -np.linspace(4.0 * w, 2.0 * w, PROJECTION_POINTS)
        part, hom1, hom2 = v1_basis(pole.tau_k, pole.c_k)
        a_minus, b_minus = _project(x, sol.sol(pole.tau_k + x)[2], part, hom1, hom2)
        b_plus = b_minus + jump_delta(pole.tau_k)
        poles.append(replace(pole, a1_minus=a_minus, b1_minus=b_minus,
                             a1_plus=a_minus, b1_plus=b_plus))
        log.info(f"pole {pole.k}: a1={a_minus:.8f} b1-={b_minus:.8f} b1+={b_plus:.8f}")
        L0 = laurent_v0(pole.tau_k, pole.c_k)
        L1 = part + hom1.scale(a_minus) + hom2.scale(b_plus)
        start = pole.tau_k + w
        y = [float(L0(w)), float(L0.derivative()(w)), float(L1(w)), float(L1.derivative()(w))]
        pending = (pole, w)
    poles.extend(trajectory.poles[len(poles):])
    return replace(trajectory, poles=tuple(poles), v1_segments=tuple(segments))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def inner1_validity(t, eps, trajectory, m_pole=M_POLE, tau_far=TAU_FAR):
    if eps <= 0:
        return ValidityCheck(False, 0.0, "eps > 0")
    tau = InnerScale(eps).tau_of_t(t)
    far = abs(tau) * eps ** 0.8
    if far > tau_far:
        return ValidityCheck(False, far, f"|tau| eps^(4/5) < {tau_far}")
    if tau > trajectory.end_tau:
        return ValidityCheck(False, tau, f"tau <= {trajectory.end_tau:.4f} (integrated range)")
    margin = math.inf
    for p in trajectory.poles:
        margin = min(margin, eps ** -0.2 * abs(tau - p.tau_k))
    return ValidityCheck(margin > m_pole, margin, f"eps^(-1/5)|tau-tau_k| > {m_pole}")


def inner1_residual(tau, eps, v0, v1):
    """Defect of u* + eps^(2/5) v0 + eps^(4/5) v1 in eps^2 u'' + 2u^3 + tu - 1.

    The eps^(4/5) and eps^(6/5) orders vanish by the v0 and v1 equations.
    """
    c = U_STAR
    d = eps ** 0.4
    return abs(d ** 4 * (6.0 * c * v1 * v1 + 6.0 * v0 * v0 * v1 + tau * v1)
               + d ** 5 * 6.0 * v0 * v1 * v1 + d ** 6 * 2.0 * v1 ** 3)


def inner1_eval(t, eps, trajectory, m_pole=M_POLE, tau_far=TAU_FAR):
    check = inner1_validity(t, eps, trajectory, m_pole, tau_far)
    if not check:
        raise OutOfValidity(check.inequality, check.margin)
    tau = InnerScale(eps).tau_of_t(t)
    v0 = trajectory.v0(tau)
    v1 = trajectory.v1(tau)
    u = CRITICAL.u_star + eps ** 0.4 * v0 + eps ** 0.8 * v1
    return SolutionSample(t=float(t), u=u, regime=PAINLEVE,
                          residual=inner1_residual(tau, eps, v0, v1), source="inner1",
                          extra={'tau': tau, 'v0': v0, 'v1': v1})


def tritronquee_scale():
    """(A, B) with v(tau) = A y(tau/B) mapping v'' + 6u* v^2 + u* tau = 0 onto y'' = 6y^2 + x."""
    B = abs(U_STAR) ** -0.4
    return -U_STAR * B ** 3, B
