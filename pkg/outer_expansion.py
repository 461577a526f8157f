"""Region I: the slowly varying equilibrium and its eps^2 corrections.

    u = u0(t) + eps^2 u1c(t) + eps^4 u2c(t)

with u0 the least root of 2u^3 + tu = 1,
    (6u0^2 + t) u1c = -u0''
    (6u0^2 + t) u2c = -6 u0 u1c^2 - u1c''.

All t-derivatives are taken from truncated Taylor series in s = t' - t,
built by solving the cubic order by order, so no finite differences are
involved in the coefficient chain.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from equilibria import CRITICAL, least_root
from painleve_errors import DegenerateBranch, OutOfValidity
from solution_sample import OUTER, SolutionSample, ValidityCheck

log = logging.getLogger(__name__)

M_OUTER = 5.0
A_DEFAULT = 1.0
_ORDER = 9


@dataclass(frozen=True)
class OuterTerms:
    t: float
    u0: float
    u1c: float
    u2c: float
    denom: float
    u0pp: float = 0.0
    u1cpp: float = 0.0
    u2cpp: float = 0.0


def _trunc(c, n=_ORDER):
    c = np.asarray(c, dtype=float)
    out = np.zeros(n)
    m = min(n, c.size)
    out[:m] = c[:m]
    return out


def _mul(a, b):
    return _trunc(P.polymul(a, b))


def _div(a, b):
    """Series quotient a/b, b[0] != 0."""
    q = np.zeros(_ORDER)
    for n in range(_ORDER):
        acc = a[n] - sum(q[j] * b[n - j] for j in range(n))
        q[n] = acc / b[0]
    return q


def _dd(a):
    """Second derivative of a series, as a series."""
    return _trunc(P.polyder(a, 2))


def u0_series(t):
    """Taylor coefficients of the least root u0(t + s) in powers of s."""
    a = np.zeros(_ORDER)
    a[0] = least_root(t)
    d0 = 6.0 * a[0] ** 2 + t
    for n in range(1, _ORDER):
        cube = _mul(_mul(a, a), a)
        # a[n] is still zero, so cube[n] holds only the lower-order part
        a[n] = -(2.0 * cube[n] + a[n - 1]) / d0
    return a


def _series_terms(t):
    u0 = u0_series(t)
    denom = _trunc(6.0 * _mul(u0, u0) + _trunc([t, 1.0]))
    u0pp = _dd(u0)
    u1 = -_div(u0pp, denom)
    u1pp = _dd(u1)
    u2 = -_div(6.0 * _mul(u0, _mul(u1, u1)) + u1pp, denom)
    u2pp = _dd(u2)
    return u0, denom, u0pp, u1, u1pp, u2, u2pp


def outer_terms(t):
    """Coefficients of the outer expansion at t < t*.

    Raises:
        DegenerateBranch: if t >= t*, where 6u0^2 + t vanishes.
    """
    if t >= CRITICAL.t_star:
        raise DegenerateBranch(f"outer expansion needs t < t* = {CRITICAL.t_star}, got t={t}")
    u0, denom, u0pp, u1, u1pp, u2, u2pp = _series_terms(t)
    return OuterTerms(t=float(t), u0=u0[0], u1c=u1[0], u2c=u2[0], denom=denom[0],
                      u0pp=u0pp[0], u1cpp=u1pp[0], u2cpp=u2pp[0])


def outer_validity(t, eps, m_outer=M_OUTER, a_default=A_DEFAULT):
    """(t* - t) eps^(-4/5) > M_outer and t >= t* - a."""
    d = CRITICAL.t_star - t
    if d <= 0:
        return ValidityCheck(False, 0.0, "(t*-t)*eps^(-4/5) > M_outer")
    margin = math.inf if eps == 0 else d * eps ** (-0.8)
    if t < CRITICAL.t_star - a_default:
        return ValidityCheck(False, margin, f"t >= t* - {a_default}")
    return ValidityCheck(margin > m_outer, margin, f"(t*-t)*eps^(-4/5) > {m_outer}")


def outer_residual(t, eps):
    """Defect of the truncated outer series in eps^2 u'' + 2u^3 + tu - 1."""
    if eps == 0:
        if t >= CRITICAL.t_star:
            raise DegenerateBranch(f"t={t} is not below t*")
        return 0.0
    c = outer_terms(t)
    e2 = eps * eps
    u0, u1, u2 = c.u0, c.u1c, c.u2c
    return (e2 ** 3 * (c.u2cpp + 12.0 * u0 * u1 * u2 + 2.0 * u1 ** 3)
            + e2 ** 4 * (6.0 * u0 * u2 ** 2 + 6.0 * u1 ** 2 * u2)
            + e2 ** 5 * 6.0 * u1 * u2 ** 2
            + e2 ** 6 * 2.0 * u2 ** 3)


def outer_value(t, eps):
    """u0 + eps^2 u1c + eps^4 u2c without the validity gate."""
    c = outer_terms(t)
    e2 = eps * eps
    return c.u0 + e2 * c.u1c + e2 * e2 * c.u2c


def outer_derivative(t, eps, order=2):
    """d/dt of the series truncated after eps^(2*order), from the same Taylor coefficients."""
    if t >= CRITICAL.t_star:
        raise DegenerateBranch(f"t={t} is not below t*")
    u0, _, _, u1, _, u2, _ = _series_terms(t)
    e2 = eps * eps
    terms = (u0[1], u1[1], u2[1])[:order + 1]
    return sum(c * e2 ** n for n, c in enumerate(terms))


def outer_eval(t, eps, m_outer=M_OUTER, a_default=A_DEFAULT):
    check = outer_validity(t, eps, m_outer, a_default)
    if not check:
        raise OutOfValidity(check.inequality, check.margin)
    u = outer_value(t, eps)
    res = outer_residual(t, eps)
    log.debug(f"outer_eval t={t} eps={eps}: u={u:.12g} residual={res:.3e}")
    return SolutionSample(t=float(t), u=u, regime=OUTER, residual=abs(res), source="outer")
