"""Region III: the second inner layer around a Painleve-1 pole.

With theta = (tau - tau_k) eps^(-1/5) and u = u* + w the equation becomes

    w'' + 6u* w^2 + 2w^3 + eps^(4/5) (tau_k + eps^(1/5) theta)(u* + w) = 0,

solved by w = w0 + eps^(4/5) w1 + eps w2 + eps^(6/5) w3 + eps^(8/5) w4 with

    w0 = -16u* / (4 + 16u*^2 theta^2)

and each correction given by variation of constants on the homogeneous pair
h1 = 8 theta / q^2, h2 = P(theta) / q^2, q = 1 + 4u*^2 theta^2.
"""
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from equilibria import CRITICAL
from painleve_errors import FrameIncomplete, OutOfRange, OutOfValidity
from p1_layer import InnerScale, jump_delta
from solution_sample import POLE, SolutionSample, ValidityCheck

log = logging.getLogger(__name__)

U_STAR = CRITICAL.u_star
M_INNER2 = 5.0
THETA_SPAN = 500.0
_RTOL = 1e-12


@dataclass(frozen=True)
class PoleLayerFrame:
    k: int
    tau_k: float
    theta_shift1: float
    c_k: float
    b1_minus: float
    theta_shift2: float = 0.0

    @classmethod
    def from_pole(cls, pole, theta_shift2=0.0):
        return cls(k=pole.k, tau_k=pole.tau_k, theta_shift1=U_STAR * pole.a1_minus / 2.0,
                   c_k=pole.c_k, b1_minus=pole.b1_minus, theta_shift2=theta_shift2)

    @property
    def b1_plus(self):
        return self.b1_minus + jump_delta(self.tau_k)


def _q(theta):
    return 1.0 + 4.0 * U_STAR ** 2 * theta * theta


def w0_eval(theta):
    return -16.0 * U_STAR / (4.0 + 16.0 * U_STAR ** 2 * theta * theta)


def w0_prime(theta):
    return 32.0 * U_STAR ** 3 * theta / _q(theta) ** 2


def _g(theta):
    # u* w0 + w0^2/2, antiderivative of (u* + w0) w0'
    w = w0_eval(theta)
    return U_STAR * w + 0.5 * w * w


def h1(theta):
    return 8.0 * theta / _q(theta) ** 2


def h1_prime(theta):
    c2 = U_STAR ** 2
    return (8.0 - 96.0 * c2 * theta * theta) / _q(theta) ** 3


def _h2_raw(theta):
    c, th2 = U_STAR, theta * theta
    num = -0.125 + 2 * c * c * th2 - c * th2 ** 2 + 0.4 * th2 ** 3 + (2 * c * c / 7) * th2 ** 4
    return num / _q(theta) ** 2


def _h2_raw_prime(theta):
    c, th2 = U_STAR, theta * theta
    num = -0.125 + 2 * c * c * th2 - c * th2 ** 2 + 0.4 * th2 ** 3 + (2 * c * c / 7) * th2 ** 4
    dnum = theta * (4 * c * c - 4 * c * th2 + 2.4 * th2 ** 2 + (16 * c * c / 7) * th2 ** 3)
    q = _q(theta)
    return (dnum * q - 16.0 * c * c * theta * num) / q ** 3


_H2_NORM = 1.0 / (h1(0.0) * _h2_raw_prime(0.0) - h1_prime(0.0) * _h2_raw(0.0))


def h2(theta):
    return _H2_NORM * _h2_raw(theta)


def h2_prime(theta):
    return _H2_NORM * _h2_raw_prime(theta)


def wronskian(theta):
    """h1 h2' - h1' h2, equal to 1 for every theta."""
    return h1(theta) * h2_prime(theta) - h1_prime(theta) * h2(theta)


def linear_potential(theta):
    """12u* w0 + 6 w0^2, the coefficient of the linearized operator."""
    w = w0_eval(theta)
    return 12.0 * U_STAR * w + 6.0 * w * w


def _w1_core(theta, J):
    # theta^4-free solution for the forcing -(u* + w0)
    return _g(theta) * h2(theta) + h1(theta) * J


@functools.lru_cache(maxsize=64)
def _integrals(tau_k, theta_shift2, side):
    """Cumulative integrals from 0 to side*THETA_SPAN.

    State: J = int h2 (u*+w0), L1/L2 = int h1/h2 * F2, K1/K2 = int h1/h2 * F4
    with F4 = -6(u*+w0) w1^2 - tau_k w1 + shift2 (u*+w0).
    """
    c = U_STAR

    def rhs(theta, y):
        base = c + w0_eval(theta)
        a, b = h1(theta), h2(theta)
        w1 = tau_k * _w1_core(theta, y[0])
        f2 = -theta * base
        f4 = -6.0 * base * w1 * w1 - tau_k * w1 + theta_shift2 * base
        return [b * base, a * f2, b * f2, a * f4, b * f4]

    sol = solve_ivp(rhs, (0.0, side * THETA_SPAN), np.zeros(5), method='DOP853',
                    rtol=_RTOL, atol=1e-14, dense_output=True)
    if sol.status != 0:
        raise OutOfRange(f"pole-layer quadrature failed: {sol.message}")
    log.debug(f"pole layer integrals tau_k={tau_k:.6f} side={side}: {sol.t.size} steps")
    return sol.sol


def _cumulative(frame, theta):
    if abs(theta) > THETA_SPAN:
        raise OutOfRange(f"|theta|={abs(theta)} beyond {THETA_SPAN}")
    if theta == 0.0:
        return np.zeros(5)
    side = 1 if theta > 0 else -1
    return _integrals(frame.tau_k, frame.theta_shift2, side)(theta)


def correction_w(n, theta, frame):
    """n-th correction of the pole layer at theta.

    Raises:
        FrameIncomplete: n=3 without c_k or the first shift, n=4 without b1_minus.
        ValueError: n outside 1..4.
    """
    if n not in (1, 2, 3, 4):
        raise ValueError(f"correction order must be 1..4, got {n}")
    c = U_STAR
    J, L1, L2, K1, K2 = _cumulative(frame, theta)
    if n == 1:
        return frame.tau_k * _w1_core(theta, J)
    if n == 2:
        return h2(theta) * L1 - h1(theta) * L2
    if n == 3:
        if math.isnan(frame.c_k) or math.isnan(frame.theta_shift1):
            raise FrameIncomplete(f"pole {frame.k}: w3 needs c_k and the first phase shift")
        return -frame.theta_shift1 * _w1_core(theta, J) + 56.0 * c * c * frame.c_k * h2(theta)
    if math.isnan(frame.b1_minus):
        raise FrameIncomplete(f"pole {frame.k}: w4 needs b1 from the first correction")
    b = frame.b1_minus if theta < 0 else frame.b1_plus
    return h2(theta) * K1 - h1(theta) * K2 + b * h2(theta)


def theta4_coefficient(n, side, frame, lo=30.0, hi=60.0, points=40):
    """theta^4 coefficient of correction n on one side, from a least-squares fit over [lo, hi]."""
    theta = side * np.linspace(lo, hi, points)
    vals = np.array([correction_w(n, th, frame) for th in theta])
    cols = [theta ** p for p in (6, 5, 4, 3, 2, 1, 0)]
    # the forcing of w4 resonates at theta^4, leaving a theta^4 log|theta| term
    cols.append(theta ** 4 * np.log(np.abs(theta)))
    A = np.column_stack(cols)
    scale = np.linalg.norm(A, axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, vals, rcond=None)
    return float(coef[2] / scale[2])


def inner2_validity(t, eps, frame, m_inner2=M_INNER2):
    if eps <= 0:
        return ValidityCheck(False, 0.0, "eps > 0")
    theta = (InnerScale(eps).tau_of_t(t) - frame.tau_k) * eps ** -0.2
    lhs = abs(theta) * abs(frame.tau_k) ** 0.2
    margin = math.inf if lhs == 0 else eps ** -0.2 / lhs
    return ValidityCheck(margin > m_inner2, margin, f"eps^(-1/5)/(|theta| tau_k^(1/5)) > {m_inner2}")


def inner2_eval(t, eps, frame, m_inner2=M_INNER2, order=4):
    """u* + w0 + eps^(4/5) w1 (+ higher corrections up to `order` when the frame has their data)."""
    check = inner2_validity(t, eps, frame, m_inner2)
    if not check:
        raise OutOfValidity(check.inequality, check.margin)
    theta = (InnerScale(eps).tau_of_t(t) - frame.tau_k) * eps ** -0.2
    shift1 = 0.0 if math.isnan(frame.theta_shift1) else frame.theta_shift1
    theta_k = theta + eps ** 0.2 * shift1 + eps ** 0.4 * frame.theta_shift2
    u = U_STAR + w0_eval(theta_k)
    powers = {1: 0.8, 2: 1.0, 3: 1.2, 4: 1.6}
    used = 0
    for n in range(1, order + 1):
        try:
            u += eps ** powers[n] * correction_w(n, theta_k, frame)
        except FrameIncomplete as e:
            log.warning(f"[{POLE}] pole {frame.k}: stopping at order {used}: {e}")
            break
        used = n
    residual = eps ** 1.8 * abs(frame.tau_k) * max(1.0, abs(theta)) ** 5
    return SolutionSample(t=float(t), u=float(u), regime=POLE, residual=residual, source="inner2",
                          extra={'theta': theta, 'pole': frame.k, 'order': used})
