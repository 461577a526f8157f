"""Equilibria of the frozen equation 2u^3 + tu = 1.

Critical constants, the real roots of the cubic and the stability of each
branch under the fast dynamics.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from painleve_errors import RootIndexError

log = logging.getLogger(__name__)

DEGENERATE_THRESHOLD = 1e-9
_DISCRIMINANT_ZERO = 1e-14

STABLE = "stable"
UNSTABLE = "unstable"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class CriticalData:
    t_star: float
    u_star: float
    E_star: float
    alpha_star: float
    # The closed form printed alongside the degeneration; it is not the energy
    # at which the quartic has a triple root, see critical_point().
    E_star_displayed: float = 0.0


@dataclass(frozen=True)
class EquilibriumSet:
    t: float
    roots: tuple
    discriminant: float

    @property
    def count(self):
        return len(self.roots)


def critical_point():
    """Closed-form critical constants of the saddle-center bifurcation.

    u* = -4^(-1/3) is the double root of the cubic at t* = -3*2^(-1/3).
    E* is the energy at which -x^4 - t*x^2 + 2x + E has the triple root u*,
    that is E* = 3u*^4 = -3u*/4, and the opposite root is alpha* = -3u*.
    """
    u_star = -4.0 ** (-1.0 / 3.0)
    t_star = -3.0 * 2.0 ** (-1.0 / 3.0)
    return CriticalData(
        t_star=t_star,
        u_star=u_star,
        E_star=-0.75 * u_star,
        alpha_star=-3.0 * u_star,
        E_star_displayed=(4.0 / 3.0) * 0.5 ** (2.0 / 3.0),
    )


CRITICAL = critical_point()


def discriminant(t):
    """D = (t/6)^3 + (1/4)^2; negative means three real roots."""
    return (t / 6.0) ** 3 + 0.0625


def cubic(u, t):
    return 2.0 * u ** 3 + t * u - 1.0


def _polish(u, t):
    # one Newton step, kept only if it does not increase the residual
    d = 6.0 * u * u + t
    if abs(d) < 1e-8:
        return u
    cand = u - cubic(u, t) / d
    return cand if abs(cubic(cand, t)) <= abs(cubic(u, t)) else u


def equilibrium_roots(t):
    """Real roots of 2u^3 + tu - 1 = 0 sorted ascending.

    Args:
        t (float): the slow parameter.

    Returns:
        EquilibriumSet: one root when the discriminant is positive, three
        otherwise (the lower two coincide at the double root when D = 0).
    """
    p = 0.5 * t
    q = -0.5
    D = discriminant(t)
    if abs(D) <= _DISCRIMINANT_ZERO and p < 0:
        double = -1.5 * q / p
        simple = 3.0 * q / p
        roots = sorted([_polish(double, t), _polish(double, t), _polish(simple, t)])
    elif D < 0:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q / (2.0 * p)) * math.sqrt(-3.0 / p)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = sorted(_polish(r * math.cos(phi - 2.0 * math.pi * j / 3.0), t) for j in range(3))
    else:
        s = math.sqrt(D)
        u = float(np.cbrt(-0.5 * q + s) + np.cbrt(-0.5 * q - s))
        roots = [_polish(u, t)]
    return EquilibriumSet(t=float(t), roots=tuple(roots), discriminant=D)


def least_root(t):
    return equilibrium_roots(t).roots[0]


def branch_stability(t, root_index):
    """Classifies root `root_index` (1-based, ascending) by the sign of 6u^2+t."""
    eq = equilibrium_roots(t)
    if not 1 <= root_index <= eq.count:
        raise RootIndexError(f"root index {root_index} out of range for {eq.count} root(s) at t={t}")
    u = eq.roots[root_index - 1]
    s = 6.0 * u * u + t
    if abs(s) < DEGENERATE_THRESHOLD:
        return DEGENERATE
    tag = STABLE if s > 0 else UNSTABLE
    log.debug(f"branch {root_index} at t={t}: 6u^2+t={s:.3e} -> {tag}")
    return tag
