import math

import numpy as np
import pytest

from conftest import compact_window
from nlswaves.cli import phase_sequence_distances
from nlswaves.dynamics import (DistanceError, amplitude_energy_floor,
                               energy_space_distance, field_energy,
                               field_momentum, hydrodynamic_distance,
                               kink_functional, liapunov_functional,
                               untwisted_momentum)
from nlswaves.invariants import momentum_quadrature


def test_distance_of_field_to_itself(gp_profile_c1):
    x = gp_profile_c1.x
    U = gp_profile_c1.field_of(x)
    assert hydrodynamic_distance(U, U, x, minimize=False) < 1e-12
    assert energy_space_distance(U, U, x, minimize=False) < 1e-12


def test_distance_invariance_under_symmetries(gp_profile_c1):
    x = gp_profile_c1.x
    psi = gp_profile_c1.field_of(x - 0.37) * np.exp(0.8j)
    assert hydrodynamic_distance(psi, gp_profile_c1, x) <= 1e-6
    assert energy_space_distance(psi, gp_profile_c1, x) <= 1e-6


def test_hydro_distance_needs_nonvanishing(gp_kink):
    x = gp_kink.x
    U0 = gp_kink.field_of(x)
    with pytest.raises(DistanceError, match="vanishes"):
        hydrodynamic_distance(U0, U0, x, minimize=False)


def test_phase_sequence_reproduces_sqrt_2pi_over_n():
    d_hy, d_Z = phase_sequence_distances(100)
    assert abs(d_hy - math.sqrt(2.0 * math.pi / 100.0)) < 1e-4
    assert d_Z / d_hy > 1.0


def test_phase_sequence_ratio_grows():
    ratios = []
    for n in (100, 300, 1000):
        d_hy, d_Z = phase_sequence_distances(n)
        ratios.append(d_Z / d_hy)
    assert ratios[0] < ratios[1] < ratios[2]


def test_untwisted_momentum_of_kink(gp_kink):
    x = gp_kink.x
    val = untwisted_momentum(gp_kink.field_of(x), x, 1.0)
    assert val == pytest.approx(math.pi, abs=1e-10)


def test_untwisted_matches_lifted_momentum(gp, gp_profile_c1):
    x = gp_profile_c1.x
    U = gp_profile_c1.field_of(x)
    p_lift = field_momentum(gp, U, gp_profile_c1.h)
    p_untw = untwisted_momentum(U, x, 1.0)
    assert abs(p_lift - p_untw) < 1e-7


def test_untwisted_momentum_constant_background():
    x = np.linspace(-40.0, 40.0, 4001)
    psi = np.ones_like(x) + 0.0j
    assert untwisted_momentum(psi, x, 1.0) == 0.0


def test_untwisted_momentum_boundary_guard():
    x = np.linspace(-40.0, 40.0, 4001)
    psi = (1.0 + 0.3 * np.exp(-((np.abs(x) - 40.0) / 5.0) ** 2)) + 0.0j
    with pytest.raises(DistanceError, match="background"):
        untwisted_momentum(psi, x, 1.0)


def test_field_energy_of_background(gp):
    x = np.linspace(-30.0, 30.0, 3001)
    psi = np.ones_like(x) + 0.0j
    assert field_energy(gp, psi, x[1] - x[0]) == pytest.approx(0.0, abs=1e-14)


def test_liapunov_validation(gp, gp_profile_c1):
    U = gp_profile_c1.field_of(gp_profile_c1.x)
    h = gp_profile_c1.h
    P = momentum_quadrature(gp, 1.0)
    with pytest.raises(ValueError, match="positive"):
        liapunov_functional(gp, U, h, 1.0, -1.0, P)
    with pytest.raises(ValueError, match="threshold"):
        liapunov_functional(gp, U, h, 1.0, 0.3, P, dPdc=-2.0)
    with pytest.raises(ValueError, match="stable"):
        liapunov_functional(gp, U, h, 1.0, 1.0, P, dPdc=0.5)


def test_liapunov_local_minimality(gp, gp_profile_c1):
    # 200 seeded perturbations, amplitude <= 0.02, supported inside |x| <= L/2;
    # M = 1 exceeds the threshold 1/(-dP/dc) = 1/2 at c* = 1
    x, h, L = gp_profile_c1.x, gp_profile_c1.h, gp_profile_c1.L
    U = gp_profile_c1.field_of(x)
    P_ref = momentum_quadrature(gp, 1.0)
    base = liapunov_functional(gp, U, h, 1.0, 1.0, P_ref, dPdc=-2.0)
    rng = np.random.Generator(np.random.Philox(2024))
    win = compact_window(x, L, 0.5)
    worst = np.inf
    for _ in range(200):
        amp = 0.02 * rng.uniform(0.1, 1.0)
        k1, k2 = rng.uniform(0.1, 2.0, size=2)
        ph = rng.uniform(0.0, 2.0 * np.pi, size=2)
        pert = win * (np.cos(k1 * x + ph[0]) + 1j * np.sin(k2 * x + ph[1]))
        pert *= amp / np.max(np.abs(pert))
        worst = min(worst, liapunov_functional(gp, U + pert, h, 1.0, 1.0, P_ref) - base)
    assert worst >= -1e-10


def test_kink_functional_at_kink(gp, gp_kink):
    x = gp_kink.x
    U0 = gp_kink.field_of(x)
    E0 = field_energy(gp, U0, gp_kink.h)
    assert kink_functional(gp, U0, x, M=1.0) == pytest.approx(E0, abs=1e-12)
    with pytest.raises(ValueError, match="positive"):
        kink_functional(gp, U0, x, M=0.0)


def test_kink_energy_floor_on_vanishing_fields(gp, gp_kink):
    # any field dipping to mu has energy at least 4 int_mu^1 sqrt(F(s^2)) ds
    x, h, L = gp_kink.x, gp_kink.h, gp_kink.L
    U0 = gp_kink.field_of(x)
    rng = np.random.Generator(np.random.Philox(7))
    win = compact_window(x, L, 0.3)
    for _ in range(20):
        amp = 0.04 * rng.uniform(0.1, 1.0)
        pert = amp * np.sin(rng.uniform(0.2, 1.5) * x) * win
        psi = U0 + pert                       # odd and real: still vanishes
        mu = float(np.min(np.abs(psi)))
        assert field_energy(gp, psi, h) >= amplitude_energy_floor(gp, mu) - 1e-9
    assert amplitude_energy_floor(gp, 0.0) == pytest.approx(
        4.0 * math.sqrt(2.0) / 3.0, abs=1e-10)


def test_distance_ratio_uniformly_bounded(gp_profile_c1):
    # surrogate for the two-distance equivalence near a fixed wave: the
    # ratio d_hy/d_Z stays in one interval for every draw
    x, L = gp_profile_c1.x, gp_profile_c1.L
    U = gp_profile_c1.field_of(x)
    rng = np.random.Generator(np.random.Philox(99))
    win = compact_window(x, L, 0.5)
    ratios = []
    for _ in range(100):
        amp = 0.02 * rng.uniform(0.1, 1.0)
        k1 = rng.uniform(0.1, 2.0)
        pert = win * (np.cos(k1 * x) + 1j * np.sin(0.7 * k1 * x + 1.0))
        pert *= amp / np.max(np.abs(pert))
        dz = energy_space_distance(U + pert, U, x, minimize=False)
        dh = hydrodynamic_distance(U + pert, U, x, minimize=False)
        ratios.append(dh / dz)
    assert 0.5 <= min(ratios) and max(ratios) <= 2.0
    assert max(ratios) / min(ratios) < 1.2
