import math

import numpy as np
import pytest

from equilibria import (CRITICAL, DEGENERATE, STABLE, UNSTABLE, branch_stability, critical_point,
                        cubic, discriminant, equilibrium_roots, least_root)
from painleve_errors import RootIndexError


# --- critical point ---

def test_critical_constants_closed_form():
    """t* = -3 2^(-1/3), u* = -4^(-1/3) and their two identities."""
    c = critical_point()
    assert c.t_star == pytest.approx(-2.3811016, abs=1e-7)
    assert c.u_star == pytest.approx(-0.6299605, abs=1e-7)
    assert abs(2 * c.u_star ** 3 + c.t_star * c.u_star - 1.0) < 1e-12
    assert abs(6 * c.u_star ** 2 + c.t_star) < 1e-12
    assert c.alpha_star == pytest.approx(-3 * c.u_star, abs=1e-15)


def test_degenerate_energy_is_triple_root_value():
    """E* makes u* a triple root of -x^4 - t* x^2 + 2x + E*."""
    c = CRITICAL
    assert c.E_star == pytest.approx(3 * c.u_star ** 4, abs=1e-12)
    x = c.u_star
    F = -x ** 4 - c.t_star * x ** 2 + 2 * x + c.E_star
    dF = -4 * x ** 3 - 2 * c.t_star * x + 2
    d2F = -12 * x ** 2 - 2 * c.t_star
    assert max(abs(F), abs(dF), abs(d2F)) < 1e-12, f"not a triple root: {F}, {dF}, {d2F}"
    # the displayed closed form is kept for reference only
    assert c.E_star_displayed == pytest.approx(0.8399473, abs=1e-7)


# --- roots ---

def test_roots_at_critical_point_coincide():
    eq = equilibrium_roots(CRITICAL.t_star)
    assert eq.count == 3
    assert eq.roots[0] == pytest.approx(CRITICAL.u_star, abs=1e-7)
    assert eq.roots[1] == pytest.approx(CRITICAL.u_star, abs=1e-7)
    # the simple root is -2u*
    assert eq.roots[2] == pytest.approx(-2 * CRITICAL.u_star, abs=1e-12)
    assert abs(discriminant(CRITICAL.t_star)) < 1e-12


def test_single_root_at_zero():
    eq = equilibrium_roots(0.0)
    assert eq.count == 1
    assert eq.roots[0] == pytest.approx(0.5 ** (1 / 3), abs=1e-12)


def test_three_roots_match_companion_matrix():
    eq = equilibrium_roots(-3.0)
    assert discriminant(-3.0) == pytest.approx(-1 / 8 + 1 / 16)
    ref = np.sort(np.roots([2.0, 0.0, -3.0, -1.0]).real)
    assert eq.count == 3
    assert np.allclose(eq.roots, ref, atol=1e-12), f"{eq.roots} vs {ref}"


@pytest.mark.parametrize("t", np.linspace(CRITICAL.t_star - 1.0, CRITICAL.t_star - 1e-3, 25))
def test_root_residuals_below_critical(t):
    eq = equilibrium_roots(t)
    assert eq.count == 3
    assert list(eq.roots) == sorted(eq.roots)
    for r in eq.roots:
        assert abs(cubic(r, t)) < 1e-12, f"residual {cubic(r, t):.2e} at t={t}"


def test_least_root_continuous_on_fine_grid():
    """Adjacent-grid jumps stay within C sqrt(dt) up to t*."""
    ts = np.arange(CRITICAL.t_star - 1.0, CRITICAL.t_star, 1e-3)
    roots = np.array([least_root(t) for t in ts])
    assert np.max(np.abs(np.diff(roots))) < 5 * math.sqrt(1e-3)


# --- stability ---

def test_branch_stability_tags():
    assert branch_stability(-3.0, 1) == STABLE
    assert branch_stability(-3.0, 2) == UNSTABLE
    assert branch_stability(CRITICAL.t_star, 1) == DEGENERATE


def test_branch_stability_bad_index():
    with pytest.raises(RootIndexError):
        branch_stability(0.0, 2)
