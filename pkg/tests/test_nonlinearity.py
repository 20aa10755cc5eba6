import math

import numpy as np
import pytest
import sympy

from nlswaves.nonlinearity import (ModelError, builtin_model, kappa_family,
                                   make_model)

RNG = np.random.default_rng(20260809)


def sympy_sonic_series(coeffs, r0=1):
    """Independent oracle: series of c_s^2 xi^2 - 4 (r0^2+xi) F(r0^2+xi)."""
    xi = sympy.symbols("xi")
    coeffs = [sympy.Rational(a) for a in coeffs]
    r0 = sympy.Rational(r0)
    f_shift = sum(a * xi ** j for j, a in enumerate(coeffs, start=1))
    F = -sympy.integrate(f_shift, (xi, 0, xi))
    cs2 = -2 * r0 ** 2 * coeffs[0]
    V = sympy.expand(cs2 * xi ** 2 - 4 * (r0 ** 2 + xi) * F)
    return sympy.Poly(V, xi).all_coeffs()[::-1]  # ascending, exact rationals


def test_gp_speed_of_sound():
    gp = builtin_model("gp")
    assert gp.c_s == pytest.approx(math.sqrt(2.0), abs=0.0)


def test_quintic_constants():
    q = builtin_model("quintic_sonic")
    assert q.r0 == 1.0
    assert q.c_s == pytest.approx(2.0, abs=1e-15)


def test_cs_identity_all_builtins():
    from nlswaves.nonlinearity import BUILTIN_MODELS
    for name in BUILTIN_MODELS:
        m = builtin_model(name)
        assert m.c_s ** 2 == pytest.approx(-2.0 * m.r02 * m.df(m.r02), rel=1e-14), name


def test_not_defocusing_rejected():
    with pytest.raises(ModelError, match="defocusing"):
        make_model({"kind": "polynomial", "coeffs": [1.0]})


def test_constant_term_rejected():
    with pytest.raises(ModelError, match="a_0"):
        make_model({"kind": "polynomial", "coeffs": [-1.0], "a0": 0.3})


def test_bad_r0_rejected():
    with pytest.raises(ModelError):
        make_model({"kind": "polynomial", "coeffs": [-1.0], "r0": -2.0})
    with pytest.raises(ModelError):
        make_model({"kind": "polynomial", "coeffs": [-1.0], "r0": 0.0})


def test_negative_rho_rejected():
    gp = builtin_model("gp")
    with pytest.raises(ModelError):
        gp.f(-0.1)
    with pytest.raises(ModelError):
        gp.F(np.array([0.5, -1e-9]))


def test_gp_F_values():
    gp = builtin_model("gp")
    assert gp.F(0.0) == pytest.approx(0.5, abs=1e-15)
    assert gp.F(1.0) == 0.0


def test_kappa_family_F0():
    for kap in (0.0, 1.0, 14.0):
        m = kappa_family(kap)
        assert m.F(0.0) == pytest.approx(0.5 + kap / 4.0, rel=1e-14)


def test_polynomial_F_matches_symbolic_antiderivative():
    coeffs = [-2.0, 3.0, -4.0, 5.0, -12.0]
    m = builtin_model("quintic_sonic")
    rho_s = sympy.symbols("rho")
    f_expr = sum(sympy.Integer(0) + sympy.Rational(a) * (rho_s - 1) ** j
                 for j, a in enumerate(coeffs, start=1))
    F_expr = sympy.integrate(f_expr, (rho_s, rho_s, 1))
    # exact rational evaluation; float evaluation of the expanded form would
    # itself lose digits near the background
    pts = RNG.uniform(0.0, 3.0, size=50)
    for pt in pts:
        exact = float(F_expr.subs(rho_s, sympy.Rational(pt)).evalf(50))
        assert m.F(float(pt)) == pytest.approx(exact, rel=1e-14, abs=1e-300)


def test_F_derivative_is_minus_f():
    m = builtin_model("saturated_exp")
    pts = RNG.uniform(0.2, 2.5, size=20)
    for h in (1e-4, 1e-5, 1e-6):
        dF = (m.F(pts + h) - m.F(pts - h)) / (2.0 * h)
        rel = np.abs(dF + m.f(pts)) / np.maximum(np.abs(m.f(pts)), 1e-12)
        assert np.max(rel) < 1e-6, h


def test_sonic_index_gp():
    gp = builtin_model("gp")
    assert (gp.m_index, gp.lambda_m) == (0, pytest.approx(-2.0, abs=1e-12))


def test_sonic_index_quintic_against_sympy():
    coeffs = [-2.0, 3.0, -4.0, 5.0, -12.0]
    series = sympy_sonic_series(coeffs)
    # first nonvanishing coefficient beyond xi^2
    nonzero = [(k, float(v)) for k, v in enumerate(series) if k >= 3 and v != 0]
    k0, lam = nonzero[0]
    assert (k0 - 3, lam) == (3, -4.0)
    m = builtin_model("quintic_sonic")
    assert m.m_index == 3
    assert m.lambda_m == pytest.approx(-4.0, abs=1e-12)
    # the next term of the series as well
    assert float(series[7]) == pytest.approx(-8.0)


def test_sonic_index_tuned_m1():
    # a_2 tuned so the xi^3 coefficient cancels: 2 a_2 = -3 a_1
    m = make_model({"kind": "polynomial", "coeffs": [-1.0, 1.5, -1.0]})
    assert m.m_index == 1
    series = sympy_sonic_series([-1.0, 1.5, -1.0])
    assert float(series[3]) == 0.0
    assert m.lambda_m == pytest.approx(float(series[4]), rel=1e-12)


def test_sonic_index_analytic_kind_matches_series_oracle():
    m = builtin_model("saturated_exp")
    # oracle: symbolic series of the sonic potential for f = exp((1-rho)/p) - 1
    xi, p = sympy.symbols("xi p")
    f = sympy.exp(-xi / p) - 1
    F = -sympy.integrate(f, (xi, 0, xi))
    cs2 = sympy.Rational(2) / p
    V = cs2 * xi ** 2 - 4 * (1 + xi) * F
    series = sympy.series(V.subs(p, sympy.Rational(2, 5)), xi, 0, 6).removeO()
    poly = sympy.Poly(sympy.expand(series), xi)
    c3 = float(poly.coeff_monomial(xi ** 3))
    assert c3 != 0.0
    assert m.m_index == 0
    assert m.lambda_m == pytest.approx(c3, rel=1e-8)


def test_sonic_sign_consistency_quintic():
    # a sonic wave exists at xi_cs = -1/2; Lambda_m xi^{m+3} < 0 on that side
    m = builtin_model("quintic_sonic")
    xi = -0.01
    assert m.lambda_m * xi ** (m.m_index + 3) < 0


def test_tanh_profile_construction():
    m = make_model({"kind": "tanh_profile",
                    "params": {"alpha": 1.0, "gamma": 2.0, "rho0": 1.0, "sigma": 1.0}})
    assert m.f(m.r02) == pytest.approx(0.0, abs=1e-14)
    assert m.df(m.r02) < 0
    with pytest.raises(ModelError, match="gamma"):
        make_model({"kind": "tanh_profile",
                    "params": {"alpha": 1.0, "gamma": 0.5, "rho0": 1.0, "sigma": 1.0}})


def test_unknown_kind_rejected():
    with pytest.raises(ModelError):
        make_model({"kind": "cubic"})
    with pytest.raises(ModelError):
        builtin_model("nope")
