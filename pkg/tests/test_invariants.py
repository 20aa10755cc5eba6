import math
import warnings

import numpy as np
import pytest

from conftest import gp_energy_exact, gp_momentum_exact, gp_momentum_slope_exact
from nlswaves import invariants as inv
from nlswaves.nonlinearity import BUILTIN_MODELS, builtin_model, kappa_family
from nlswaves.potential import find_turning_point
from nlswaves.profile import solve_profile

# frozen by the integral oracle: sqrt(F(0)) dP/dc|_0 on kappa = 0, 1, 5, 20, 100
KAPPA_SLOPES = [-2.0, -1.7833185, -1.4682274, -1.2333414, -1.0934577]
KAPPAS = [0.0, 1.0, 5.0, 20.0, 100.0]


def test_gp_energy_and_momentum_values(gp, gp_profile_c1, gp_kink):
    assert inv.energy(gp_profile_c1) == pytest.approx(2.0 / 3.0, abs=1e-6)
    assert inv.momentum_quadrature(gp, 1.0) == pytest.approx(math.pi / 2 - 1, abs=1e-8)
    assert inv.momentum_grid(gp_profile_c1) == pytest.approx(math.pi / 2 - 1, abs=1e-7)
    Ek = inv.energy(gp_kink)
    assert Ek == pytest.approx(4.0 * math.sqrt(2.0) / 3.0, abs=1e-6)
    assert Ek == pytest.approx(inv.kink_energy(gp), abs=1e-6)
    assert inv.momentum_grid(gp_kink) == 0.0     # the pi jump is a point mass


def test_gp_closed_form_branch(gp):
    for c in (0.3, 0.5, 0.9, 1.2):
        assert inv.momentum_quadrature(gp, c) == pytest.approx(
            gp_momentum_exact(c), abs=1e-10)
        assert inv.energy_quadrature(gp, c) == pytest.approx(
            gp_energy_exact(c), abs=1e-10)


def test_energy_routes_agree(gp):
    for c in (0.4, 1.0):
        p = solve_profile(gp, c)
        assert inv.energy(p) == pytest.approx(inv.energy_quadrature(gp, c), abs=1e-7)


def test_momentum_pair_all_builtins():
    for name in BUILTIN_MODELS:
        m = builtin_model(name)
        for frac in (0.35, 0.75):
            c = frac * m.c_s
            if find_turning_point(m, c).status == "no_wave":
                continue
            gap = inv.momentum_pair_gap(m, c)
            P = abs(inv.momentum_quadrature(m, c))
            assert gap <= 1e-7 * max(1.0, P), (name, c, gap)


def test_gp_diagram_all_stable(gp):
    d = inv.compute_diagram(gp, 0.05, 1.40, 28)
    assert not d.gaps
    assert all(pt.verdict == "stable" for pt in d.points)
    for pt in d.points:
        assert pt.hamilton_residual <= 1e-3
        assert pt.dPdc == pytest.approx(gp_momentum_slope_exact(pt.c), abs=1e-6)
    assert d.kink is not None
    assert d.kink["P_limit"] == pytest.approx(math.pi, abs=1e-3)


def test_cqs1_branch_is_everywhere_stable():
    # the dark branch of this family never has a positive momentum slope;
    # its second family of waves (above-background, flagged by other_roots)
    # is a separate fold with negative slope as well
    m = builtin_model("cqs1")
    d = inv.compute_diagram(m, 0.03, 0.999 * m.c_s, 40)
    assert not d.gaps
    assert all(pt.verdict == "stable" for pt in d.points)
    assert max(pt.hamilton_residual for pt in d.points) <= 1e-3
    assert not d.notes


def test_cubic_quintic_structure(cubic_quintic):
    d = inv.compute_diagram(cubic_quintic, 0.0, 1.40, 29)
    verdicts = [pt.verdict for pt in d.points]
    assert verdicts[0] == "unstable"                     # the bubble endpoint
    assert "stable" in verdicts and "unstable" in verdicts
    assert any("changes sign" in note for note in d.notes)
    residuals = [pt.hamilton_residual for pt in d.points
                 if np.isfinite(pt.hamilton_residual)]
    assert residuals and max(residuals) <= 1e-3
    # slope crosses zero between the last unstable and first stable point
    flips = [i for i in range(1, len(verdicts))
             if verdicts[i - 1] == "unstable" and verdicts[i] == "stable"]
    assert flips
    c_flip = d.points[flips[0]].c
    assert 0.3 < c_flip < 0.7


def test_cusp_detection_on_refined_crossing(cubic_quintic):
    # bracket the slope zero, then classify exactly at the crossing speed
    from scipy.optimize import brentq
    dPdc = lambda c: inv._branch_derivatives(cubic_quintic, c, inv.momentum_quadrature,
                                             second=False)[0]
    c_star = brentq(dPdc, 0.35, 0.60, xtol=1e-10)
    pt = inv._branch_point(cubic_quintic, c_star)
    assert pt.verdict == "cusp_unstable"
    assert abs(pt.dPdc) <= 1e-4 * max(1.0, abs(pt.P) / cubic_quintic.c_s)
    assert abs(pt.d2Pdc2) > 1e-2


def test_kink_slope_gp(gp):
    slope = inv.kink_momentum_slope(gp)
    assert slope["dPdc0"] == pytest.approx(-2.0 * math.sqrt(2.0), abs=1e-8)
    assert slope["VK0"] == pytest.approx(-1.0, abs=1e-8)
    # independent branch path: finite differences of the quadrature momentum
    cs = np.array([0.04, 0.02, 0.01])
    fd = [(inv.momentum_quadrature(gp, c + 1e-4)
           - inv.momentum_quadrature(gp, c - 1e-4)) / 2e-4 for c in cs]
    extrap = float(np.polyval(np.polyfit(cs, fd, 2), 0.0))
    assert abs(extrap - slope["dPdc0"]) / abs(slope["dPdc0"]) < 1e-4


def test_kappa_family_slopes_approach_minus_one():
    vals = []
    for kap in KAPPAS:
        m = kappa_family(kap)
        s = inv.kink_momentum_slope(m)
        assert s["dPdc0"] < 0.0               # the kink stays linearly stable
        vals.append(math.sqrt(m.F(0.0)) * s["dPdc0"])
    assert np.allclose(vals, KAPPA_SLOPES, atol=2e-7)
    gaps = [abs(v + 1.0) for v in vals]
    assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    assert all(-2.0 - 1e-9 < v < -1.0 for v in vals)


def test_kink_energy_values_and_crossing(gp):
    assert inv.kink_energy(gp) == pytest.approx(4.0 * math.sqrt(2.0) / 3.0, abs=1e-12)
    target = math.sqrt(2.0) * math.pi
    assert inv.kink_energy(kappa_family(13.0)) < target
    assert inv.kink_energy(kappa_family(15.0)) > target


def test_kink_energy_positive_for_kink_bearing_builtins():
    for name in BUILTIN_MODELS:
        m = builtin_model(name)
        if find_turning_point(m, 0.0).status != "kink":
            continue
        assert inv.kink_energy(m) > 0.0, name


def test_p_limit_for_kink_bearing_builtins():
    for name in BUILTIN_MODELS:
        m = builtin_model(name)
        if find_turning_point(m, 0.0).status != "kink":
            continue
        lim = inv.extrapolate_momentum_to_zero(m)
        assert abs(lim - m.r02 * math.pi) < 1e-3, (name, lim)


def test_bubble_slope(cubic_quintic, gp):
    val = inv.bubble_momentum_slope(cubic_quintic)
    assert val > 0.0
    # independent path: extrapolated difference quotients of the momentum
    cs = np.array([0.02, 0.01, 0.005])
    fd = np.array([inv.momentum_quadrature(cubic_quintic, c) for c in cs]) / cs
    slope_fd = float(np.polyval(np.polyfit(cs, fd, 2), 0.0))
    assert abs(slope_fd - val) / val < 1e-4
    with pytest.raises(inv.InvariantError, match="kink"):
        inv.bubble_momentum_slope(gp)


def test_momentum_kink_limit_flag(gp):
    assert inv.momentum_quadrature(gp, 0.0) == math.pi


def test_bubble_momentum_zero_at_rest(cubic_quintic):
    assert inv.momentum_quadrature(cubic_quintic, 0.0) == 0.0


def test_sonic_energy_diverges(quintic_sonic):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = solve_profile(quintic_sonic, quintic_sonic.c_s, h=0.1)
    with pytest.raises(inv.InvariantError, match="diverges"):
        inv.energy(p)


def test_no_wave_errors(gp):
    with pytest.raises(inv.InvariantError, match="no travelling wave"):
        inv.momentum_quadrature(gp, 1.5)
    with pytest.raises(inv.InvariantError):
        inv.compute_diagram(gp, 0.5, 0.2, 5)
