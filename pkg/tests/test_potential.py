import math

import numpy as np
import pytest

from nlswaves.nonlinearity import builtin_model, kappa_family
from nlswaves.potential import (PotentialError, find_turning_point,
                                kink_turning_expansion_residual,
                                newton_potential, newton_potential_prime)

RNG = np.random.default_rng(7)


def test_gp_potential_closed_form(gp):
    # W_c(xi) = xi^2 (c^2 - 2 - 2 xi) for the GP nonlinearity
    for c in (0.0, 0.7, 1.0, 1.3):
        xi = RNG.uniform(-1.0, 2.0, size=40)
        exact = xi ** 2 * (c * c - 2.0 - 2.0 * xi)
        ours = newton_potential(gp, c, xi)
        assert np.max(np.abs(ours - exact)) < 1e-13


def test_double_root_at_origin():
    for name in ("gp", "cqs1", "cubic_quintic", "saturated_exp"):
        m = builtin_model(name)
        for c in (0.0, 0.3 * m.c_s, 0.9 * m.c_s):
            assert newton_potential(m, c, 0.0) == 0.0
            assert newton_potential_prime(m, c, 0.0) == 0.0


def test_quintic_sonic_turning_value(quintic_sonic):
    assert newton_potential(quintic_sonic, 2.0, -0.5) == pytest.approx(0.0, abs=1e-14)


def test_speed_splitting_identity(gp):
    # W_c = W_{c_s} - (c_s^2 - c^2) xi^2
    xi = np.linspace(-0.99, 3.0, 64)
    for m in (gp, builtin_model("cqs3")):
        for c in (0.2, 0.8 * m.c_s):
            lhs = newton_potential(m, c, xi)
            rhs = newton_potential(m, m.c_s, xi) - (m.c_s ** 2 - c * c) * xi ** 2
            assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_monotone_in_speed(gp):
    xi = np.linspace(-0.9, 1.0, 101)
    xi = xi[xi != 0.0]
    w1 = newton_potential(gp, 0.4, xi)
    w2 = newton_potential(gp, 0.9, xi)
    assert np.all(w1 < w2)


def test_domain_edge_rejected(gp):
    with pytest.raises(PotentialError):
        newton_potential(gp, 1.0, -1.0 - 1e-6)
    with pytest.raises(PotentialError):
        newton_potential_prime(gp, 1.0, np.array([-2.0]))


def test_gp_verdicts(gp):
    v = find_turning_point(gp, 1.0)
    assert v.status == "dark_with_xi"
    assert v.xi_c == pytest.approx(-0.5, abs=1e-12)
    assert find_turning_point(gp, 1.5).status == "no_wave"
    v0 = find_turning_point(gp, 0.0)
    assert v0.status == "kink" and v0.xi_c == -1.0


def test_sonic_verdict(quintic_sonic):
    v = find_turning_point(quintic_sonic, quintic_sonic.c_s)
    assert v.status == "sonic"
    assert v.xi_c == pytest.approx(-0.5, abs=1e-10)
    # barely off the sound speed: ordinary subsonic wave
    v2 = find_turning_point(quintic_sonic, quintic_sonic.c_s * (1 - 1e-6))
    assert v2.status == "dark_with_xi"


def test_negative_speed_rejected(gp):
    with pytest.raises(PotentialError):
        find_turning_point(gp, -0.1)


def test_simple_zero_and_negativity_between(gp):
    for m, c in ((gp, 0.8), (builtin_model("cubic_quintic"), 0.3),
                 (builtin_model("cqs3"), 0.5)):
        v = find_turning_point(m, c)
        slope = newton_potential_prime(m, c, v.xi_c)
        assert abs(slope) > 1e-10
        inner = np.linspace(0.02 * v.xi_c, 0.98 * v.xi_c, 257)
        assert np.all(newton_potential(m, c, inner) < 0.0)


def test_bubble_at_zero_speed(cubic_quintic):
    v = find_turning_point(cubic_quintic, 0.0)
    assert v.status == "dark_with_xi"           # stationary bubble, xi_0 = -1/2
    assert v.xi_c == pytest.approx(-0.5, abs=1e-12)


def test_upper_branch_flagged():
    # the cubic-quintic-septic (I) family has a second admissible root just
    # below the sound speed; the nearest-to-zero root wins, flagged
    m = builtin_model("cqs1")
    c = math.sqrt(2.0 - 2.0 / 250.0)
    v = find_turning_point(m, c)
    assert v.status == "dark_with_xi"
    assert v.other_roots
    v2 = find_turning_point(m, 0.8)
    assert not v2.other_roots


def test_xi_expansion_exact_for_gp(gp):
    # xi_c = c^2/2 - 1 exactly, which the expansion reproduces termwise
    for c in (0.1, 0.05):
        assert kink_turning_expansion_residual(gp, c) < 1e-12
    assert kink_turning_expansion_residual(gp, 0.0) == 0.0


def test_xi_expansion_fourth_order_kappa_family():
    # frozen from the bisection oracle: residual/c^4 = 0.0741 across halvings
    m = kappa_family(1.0)
    cs = (0.05, 0.025, 0.0125)
    ratios = np.array([kink_turning_expansion_residual(m, c) / c ** 4 for c in cs])
    assert np.all(ratios < 0.15)
    assert ratios.max() / ratios.min() < 1.01


def test_xi_expansion_requires_kink(cubic_quintic):
    with pytest.raises(PotentialError, match="kink"):
        kink_turning_expansion_residual(cubic_quintic, 0.05)
