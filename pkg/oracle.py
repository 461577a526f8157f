"""Reference solutions of eps^2 u'' + 2u^3 + tu = 1 by adaptive integration.

The run starts on the outer branch well before t*, records every turning
point of u (zeros of u') and monitors H = eps^2 u'^2/2 + u^4/2 + t u^2/2 - u,
whose exact drift is dH/dt = u^2/2.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from equilibria import CRITICAL
from outer_expansion import outer_derivative, outer_terms
from painleve_errors import (DegenerateBranch, EmptyWindow, StepUnderflow, ToleranceFailure)
from solution_sample import ORACLE, SolutionSample

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
PEAK = "peak"
TROUGH = "trough"


@dataclass(frozen=True)
class OracleEvent:
    kind: str
    t: float
    u: float


@dataclass(frozen=True)
class OracleRun:
    eps: float
    t0: float
    t1: float
    tol: float
    samples: tuple
    events: tuple
    max_drift: float = 0.0
    sol: object = field(default=None, repr=False, compare=False)

    def u(self, t):
        return float(self.sol(t)[0])

    def du(self, t):
        return float(self.sol(t)[1])

    def peaks(self, kind=PEAK):
        return [e for e in self.events if e.kind == kind]

    def as_samples(self):
        """SolutionSample rows with the energy-drift bound as residual."""
        return [SolutionSample(t=t, u=u, regime=ORACLE, residual=self.max_drift, source="oracle")
                for t, u, _ in self.samples]


def hamiltonian(t, u, du, eps):
    return 0.5 * eps * eps * du * du + 0.5 * u ** 4 + 0.5 * t * u * u - u


def initial_condition(t0, eps):
    """(u, u') on the outer branch truncated after eps^2.

    Raises:
        DegenerateBranch: t0 is not safely below t*.
    """
    if t0 >= CRITICAL.t_star - 0.2:
        raise DegenerateBranch(f"initial condition needs t0 < t* - 0.2, got {t0}")
    terms = outer_terms(t0)
    e2 = eps * eps
    u = terms.u0 + e2 * terms.u1c
    du = outer_derivative(t0, eps, order=1)
    return u, du


def _rhs(eps):
    e2 = eps * eps

    def rhs(t, y):
        u, du, _ = y
        return [du, (1.0 - 2.0 * u ** 3 - t * u) / e2, 0.5 * u * u]
    return rhs


def _turning_event(t, y):
    return y[1]


def solve_p2(eps, t0, t1, tol=DEFAULT_TOL, max_step=None):
    """Integrates from the outer initial condition at t0 to t1 with DOP853.

    Raises:
        ToleranceFailure: the integrator gave up.
        StepUnderflow: the step size collapsed below machine resolution.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    u0, du0 = initial_condition(t0, eps)
    max_step = max_step or eps
    sol = solve_ivp(_rhs(eps), (t0, t1), [u0, du0, 0.0], method='DOP853', rtol=tol, atol=tol,
                    dense_output=True, events=_turning_event, first_step=0.1 * eps,
                    max_step=max_step)
    if sol.status == -1:
        if 'step size' in sol.message.lower():
            raise StepUnderflow(f"oracle at eps={eps}: {sol.message}")
        raise ToleranceFailure(f"oracle at eps={eps}: {sol.message}")
    events = []
    for te, ye in zip(sol.t_events[0], sol.y_events[0]):
        u = ye[0]
        acc = (1.0 - 2.0 * u ** 3 - te * u) / (eps * eps)
        events.append(OracleEvent(PEAK if acc < 0 else TROUGH, float(te), float(u)))
    H = hamiltonian(sol.t, sol.y[0], sol.y[1], eps)
    drift = np.abs((H - H[0]) - sol.y[2])
    span = max(t1 - t0, 1.0)
    max_drift = float(np.max(drift) / span)
    if max_drift > 100 * tol:
        log.warning(f"oracle eps={eps}: energy drift {max_drift:.2e} per unit t exceeds 100*tol")
    log.info(f"oracle eps={eps}: {sol.t.size} steps, {len(events)} turning points")
    samples = tuple(zip(sol.t.tolist(), sol.y[0].tolist(), sol.y[1].tolist()))
    return OracleRun(eps=eps, t0=t0, t1=t1, tol=tol, samples=samples, events=tuple(events),
                     max_drift=max_drift, sol=sol.sol)


def crossings(run, t_lo=None, t_hi=None):
    """Times of the turning points (zeros of u') inside [t_lo, t_hi]."""
    t_lo = run.t0 if t_lo is None else t_lo
    t_hi = run.t1 if t_hi is None else t_hi
    return np.array([e.t for e in run.events if t_lo <= e.t <= t_hi])


def extract_envelope(run, window):
    """(t_center, u_min, u_max) per window over the run.

    A window without turning points is slow: u_min = u_max = u(t_center).

    Raises:
        EmptyWindow: the window is shorter than one local oscillation period.
    """
    times = np.array([e.t for e in run.events])
    out = []
    start = run.t0
    while start + window <= run.t1 + 1e-12:
        stop = start + window
        centre = 0.5 * (start + stop)
        inside = [e for e in run.events if start <= e.t < stop]
        if not inside:
            u = run.u(centre)
            out.append((centre, u, u))
        else:
            near = times[np.argsort(np.abs(times - centre))[:4]]
            period = 2.0 * float(np.median(np.diff(np.sort(near)))) if near.size > 1 else math.inf
            if window < period:
                raise EmptyWindow(f"window {window} shorter than the local period {period:.4g} at t={centre:.4f}")
            troughs = [e.u for e in inside if e.kind == TROUGH] or [e.u for e in inside]
            peaks = [e.u for e in inside if e.kind == PEAK] or [e.u for e in inside]
            out.append((centre, min(troughs), max(peaks)))
        start = stop
    return out


def continue_pole(tau_k, c_k, radius=0.3, tol=1e-12):
    """Continues P1 from the left of a pole to the right along the upper semicircle.

    Starts from the Laurent series at tau_k - radius and integrates
    v'' = -6u* v^2 - u* tau for complex tau = tau_k + radius e^(i phi),
    phi from pi to 0.  Returns (v, v') at tau_k + radius as complex numbers;
    their imaginary parts measure the consistency of the continuation.
    """
    from p1_layer import laurent_v0
    c = CRITICAL.u_star
    L = laurent_v0(tau_k, c_k)
    dL = L.derivative()
    x0 = -radius
    y0 = np.array([complex(L(x0)), complex(dL(x0))])

    def rhs(phi, y):
        tau = tau_k + radius * np.exp(1j * phi)
        dtau = 1j * radius * np.exp(1j * phi)
        v, dv = y
        return np.array([dv * dtau, (-6.0 * c * v * v - c * tau) * dtau])

    sol = solve_ivp(rhs, (math.pi, 0.0), y0.astype(complex), method='DOP853', rtol=tol, atol=tol)
    if sol.status != 0:
        raise ToleranceFailure(f"complex continuation around tau_k={tau_k} failed: {sol.message}")
    v, dv = sol.y[:, -1]
    return complex(v), complex(dv)


def laurent_right(tau_k, c_k, radius):
    """Laurent values (v, v') at tau_k + radius, for comparison with continue_pole."""
    from p1_layer import laurent_v0
    L = laurent_v0(tau_k, c_k)
    return float(L(radius)), float(L.derivative()(radius))
