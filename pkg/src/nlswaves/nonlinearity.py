"""Nonlinearity models for the defocusing NLS with nonzero background.

A model bundles the nonlinearity f, its derivative, the potential-energy
density F(rho) = integral of f from rho up to r0^2, and the constants
derived from the background amplitude r0: the speed of sound

    c_s = sqrt(-2 r0^2 f'(r0^2)) > 0,

and the sonic degeneracy index m, defined as the order of the first
nonvanishing coefficient of the sonic effective potential

    c_s^2 xi^2 - 4 (r0^2 + xi) F(r0^2 + xi) = Lambda_m xi^{m+3} + O(xi^{m+4}).

Polynomial models are stored in the shifted basis (rho - r0^2)^j so that
f(r0^2) = 0 holds structurally and F has an exact polynomial antiderivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

POLYNOMIAL = "polynomial"
GROSS_PITAEVSKII = "gross_pitaevskii"
SATURATED_EXPONENTIAL = "saturated_exponential"
SATURATED_RATIONAL = "saturated_rational"
TANH_PROFILE = "tanh_profile"

KINDS = (POLYNOMIAL, GROSS_PITAEVSKII, SATURATED_EXPONENTIAL,
         SATURATED_RATIONAL, TANH_PROFILE)

# highest sonic index searched; beyond this the model is declared degenerate
M_MAX = 6
# relative threshold on dimensionless series coefficients
SONIC_COEFF_TOL = 1e-9


class ModelError(ValueError):
    """Raised when a nonlinearity specification is inconsistent."""


@dataclass(frozen=True)
class NonlinearityModel:
    """Immutable nonlinearity; safe to share across parallel workers."""

    kind: str
    r0: float
    coeffs: tuple = ()          # shifted-basis a_1..a_d, polynomial kind only
    params: dict = field(default_factory=dict)
    c_s: float = 0.0            # derived
    m_index: Optional[int] = None
    lambda_m: Optional[float] = None

    # -- pointwise evaluation ------------------------------------------------

    def f(self, rho):
        """Nonlinearity f(rho); rho may be scalar or array, rho >= 0."""
        rho = _check_rho(rho)
        u = rho - self.r0 ** 2
        if self.kind in (POLYNOMIAL, GROSS_PITAEVSKII):
            return _shifted_polyval(self._poly_coeffs(), u)
        if self.kind == SATURATED_EXPONENTIAL:
            return np.exp(-u / self.params["rho0"]) - 1.0
        if self.kind == SATURATED_RATIONAL:
            p0 = self.params["rho0"]
            return (p0 / 2.0) * ((1.0 + rho / p0) ** -2
                                 - (1.0 + self.r0 ** 2 / p0) ** -2)
        if self.kind == TANH_PROFILE:
            a, g, p0, s = (self.params[k] for k in ("alpha", "gamma", "rho0", "sigma"))
            return -a * rho * (1.0 + g * np.tanh((rho ** 2 - p0 ** 2) / s ** 2))
        raise ModelError(f"unknown kind {self.kind!r}")

    def df(self, rho):
        """Derivative f'(rho)."""
        rho = _check_rho(rho)
        u = rho - self.r0 ** 2
        if self.kind in (POLYNOMIAL, GROSS_PITAEVSKII):
            a = self._poly_coeffs()
            dcoeffs = tuple(j * aj for j, aj in enumerate(a, start=1))
            # d/du sum a_j u^j = sum j a_j u^{j-1}
            out = np.zeros_like(np.asarray(u, dtype=float))
            for j, cj in enumerate(dcoeffs):
                out = out + cj * np.asarray(u, dtype=float) ** j
            return out if out.ndim else float(out)
        if self.kind == SATURATED_EXPONENTIAL:
            return -np.exp(-u / self.params["rho0"]) / self.params["rho0"]
        if self.kind == SATURATED_RATIONAL:
            return -(1.0 + rho / self.params["rho0"]) ** -3
        if self.kind == TANH_PROFILE:
            a, g, p0, s = (self.params[k] for k in ("alpha", "gamma", "rho0", "sigma"))
            t = np.tanh((rho ** 2 - p0 ** 2) / s ** 2)
            return -a * (1.0 + g * t) - a * rho * g * (1.0 - t ** 2) * 2.0 * rho / s ** 2
        raise ModelError(f"unknown kind {self.kind!r}")

    def F(self, rho):
        """Potential density F(rho), the integral of f from rho to r0^2.

        Exact closed form for polynomial, GP and both saturated kinds;
        adaptive quadrature (abs tol 1e-12) for the tanh kind. F enters
        square roots downstream, so its error must stay far below the
        profile tolerances.
        """
        rho = _check_rho(rho)
        u = rho - self.r0 ** 2
        if self.kind in (POLYNOMIAL, GROSS_PITAEVSKII):
            a = self._poly_coeffs()
            out = np.zeros_like(np.asarray(u, dtype=float))
            uu = np.asarray(u, dtype=float)
            for j, aj in enumerate(a, start=1):
                out = out - aj * uu ** (j + 1) / (j + 1)
            return out if out.ndim else float(out)
        if self.kind == SATURATED_EXPONENTIAL:
            p0 = self.params["rho0"]
            return p0 * np.expm1(-u / p0) + u
        if self.kind == SATURATED_RATIONAL:
            # cancellation-free closed form; the difference-of-primitives
            # expression loses all digits in the far tail where F = O(u^2)
            p0 = self.params["rho0"]
            r02 = self.r0 ** 2
            return u * u / (2.0 * (1.0 + rho / p0) * (1.0 + r02 / p0) ** 2)
        if self.kind == TANH_PROFILE:
            scalar = np.isscalar(rho) or np.asarray(rho).ndim == 0
            rr = np.atleast_1d(np.asarray(rho, dtype=float))
            # relative targeting keeps the O(u^2) tail values meaningful
            out = np.array([quad(self.f, r, self.r0 ** 2, epsabs=1e-300,
                                 epsrel=1e-12, limit=200)[0] for r in rr])
            return float(out[0]) if scalar else out
        raise ModelError(f"unknown kind {self.kind!r}")

    # -- helpers -------------------------------------------------------------

    def _poly_coeffs(self):
        if self.kind == GROSS_PITAEVSKII:
            return (-1.0,)
        return self.coeffs

    @property
    def r02(self) -> float:
        return self.r0 ** 2


def _check_rho(rho):
    arr = np.asarray(rho, dtype=float)
    if np.any(arr < 0):
        raise ModelError("rho must be nonnegative")
    return rho


def _shifted_polyval(coeffs, u):
    out = np.zeros_like(np.asarray(u, dtype=float))
    uu = np.asarray(u, dtype=float)
    for j, aj in enumerate(coeffs, start=1):
        out = out + aj * uu ** j
    return out if out.ndim else float(out)


def make_model(spec: dict) -> NonlinearityModel:
    """Build a validated model from a parsed config mapping.

    spec keys: kind (required), r0 (default 1.0), coeffs (polynomial kind),
    params (analytic kinds). Rejects non-defocusing models (f'(r0^2) >= 0),
    polynomial specs with a constant term, and nonpositive r0.
    """
    kind = spec.get("kind")
    if kind not in KINDS:
        raise ModelError(f"unknown nonlinearity kind {kind!r}")
    r0 = float(spec.get("r0", 1.0))
    if not (r0 > 0.0) or not math.isfinite(r0):
        raise ModelError("r0 must be a positive real")
    coeffs = tuple(float(c) for c in spec.get("coeffs", ()))
    params = {k: float(v) for k, v in dict(spec.get("params", {})).items()}

    if kind == POLYNOMIAL:
        if not coeffs:
            raise ModelError("polynomial kind requires coeffs a_1..a_d")
        if "a0" in params or spec.get("a0") is not None:
            raise ModelError("constant term a_0 is not allowed; "
                             "f(r0^2) = 0 must hold structurally")
    if kind == TANH_PROFILE:
        missing = {"alpha", "gamma", "rho0", "sigma"} - set(params)
        if missing:
            raise ModelError(f"tanh_profile requires params {sorted(missing)}")
        if abs(params["gamma"]) <= 1.0:
            raise ModelError("tanh_profile needs |gamma| > 1 so that f can vanish")
        # background fixed by f(r0^2)=0: r0^4 = rho0^2 + sigma^2 atanh(-1/gamma)
        val = params["rho0"] ** 2 + params["sigma"] ** 2 * math.atanh(-1.0 / params["gamma"])
        if val <= 0:
            raise ModelError("tanh_profile parameters admit no positive background")
        r0 = val ** 0.25
    if kind in (SATURATED_EXPONENTIAL, SATURATED_RATIONAL) and "rho0" not in params:
        raise ModelError(f"{kind} requires params.rho0")

    probe = NonlinearityModel(kind=kind, r0=r0, coeffs=coeffs, params=params)
    fp0 = float(probe.df(r0 ** 2))
    if fp0 >= 0.0:
        raise ModelError(f"not defocusing: f'(r0^2) = {fp0:.6g} >= 0")
    c_s = math.sqrt(-2.0 * r0 ** 2 * fp0)

    model = NonlinearityModel(kind=kind, r0=r0, coeffs=coeffs, params=params, c_s=c_s)
    _validate(model)
    m, lam = sonic_index(model)
    return NonlinearityModel(kind=kind, r0=r0, coeffs=coeffs, params=params,
                             c_s=c_s, m_index=m, lambda_m=lam)


def _validate(model: NonlinearityModel) -> None:
    r02 = model.r02
    if abs(model.f(r02)) > 1e-13 * max(1.0, abs(model.df(r02)) * r02):
        raise ModelError("f(r0^2) != 0")
    # F positive on a punctured neighborhood of the background
    for rel in (1e-4, 1e-3, 1e-2, 0.05):
        for s in (-1.0, 1.0):
            rho = r02 * (1.0 + s * rel)
            if rho >= 0 and model.F(rho) <= 0.0:
                raise ModelError(f"F({rho:.6g}) <= 0 near the background")


def sonic_index(model: NonlinearityModel):
    """Smallest m with Lambda_m != 0, or (None, None) if degenerate.

    Lambda_m is the coefficient of xi^{m+3} in the series of the sonic
    effective potential c_s^2 xi^2 - 4 (r0^2+xi) F(r0^2+xi). Polynomial
    kinds use exact shifted-basis arithmetic; analytic kinds use
    high-precision numerical Taylor coefficients of f at r0^2.
    Coefficients are compared at tolerance 1e-9 after nondimensionalizing
    by c_s^2 r0^{-2(k-2)}.
    """
    r02 = model.r02
    cs2 = model.c_s ** 2
    if model.kind in (POLYNOMIAL, GROSS_PITAEVSKII):
        a = list(model._poly_coeffs())

        def coeff(k):  # v_k = 4 [ a_{k-1} r0^2/k + a_{k-2}/(k-1) ]
            a1 = a[k - 2] if k - 2 < len(a) else 0.0
            a2 = a[k - 3] if k - 3 < len(a) else 0.0
            return 4.0 * (a1 * r02 / k + a2 / (k - 1))
    else:
        derivs = _f_derivatives(model, M_MAX + 2)

        def coeff(k):  # v_k = 4 [ d_{k-1} r0^2/k! + d_{k-2}/(k-1)! ]
            d1 = derivs[k - 1]
            d2 = derivs[k - 2]
            return 4.0 * (d1 * r02 / math.factorial(k) + d2 / math.factorial(k - 1))

    for m in range(M_MAX + 1):
        k = m + 3
        vk = coeff(k)
        if abs(vk) * r02 ** (k - 2) / cs2 > SONIC_COEFF_TOL:
            return m, float(vk)
    return None, None


def _f_derivatives(model: NonlinearityModel, nmax: int):
    """d_j = f^(j)(r0^2) for j = 0..nmax, via high-precision differentiation."""
    import mpmath

    r02 = model.r02
    if model.kind == SATURATED_EXPONENTIAL:
        p0 = model.params["rho0"]
        g = lambda x: mpmath.e ** ((r02 - x) / p0) - 1
    elif model.kind == SATURATED_RATIONAL:
        p0 = model.params["rho0"]
        g = lambda x: (p0 / 2) * ((1 + x / p0) ** -2 - (1 + r02 / p0) ** -2)
    elif model.kind == TANH_PROFILE:
        a, gm, p0, s = (model.params[k] for k in ("alpha", "gamma", "rho0", "sigma"))
        g = lambda x: -a * x * (1 + gm * mpmath.tanh((x ** 2 - p0 ** 2) / s ** 2))
    else:
        raise ModelError("derivative table only needed for analytic kinds")
    with mpmath.workdps(60):
        return [float(mpmath.diff(g, r02, j, h=mpmath.mpf("1e-6"))) for j in range(nmax + 1)]


# Builtin nonlinearities (the figure families plus the sonic quintic and the
# cubic kink family used throughout the tests and CLI configs).
BUILTIN_MODELS = {
    "gp": {"kind": GROSS_PITAEVSKII, "r0": 1.0},
    "cqs1": {"kind": POLYNOMIAL, "r0": 1.0, "coeffs": [-1.0, 1.5, -1.5]},
    "cqs2a": {"kind": POLYNOMIAL, "r0": 1.0, "coeffs": [-4.0, 0.0, -36.0]},
    "cqs2b": {"kind": POLYNOMIAL, "r0": 1.0, "coeffs": [-4.0, 0.0, -60.0]},
    "cqs3": {"kind": POLYNOMIAL, "r0": 1.0, "coeffs": [-0.5, 0.75, -2.0]},
    "degenerate": {"kind": POLYNOMIAL, "r0": 1.0, "coeffs": [-2.0, 3.0, -4.0, 5.0, -6.0]},
    "degenerate_perturbed": {"kind": POLYNOMIAL, "r0": 1.0,
                             "coeffs": [-2.0, 3.0 - 1e-3, -4.0, 5.0, -6.0]},
    "saturated_exp": {"kind": SATURATED_EXPONENTIAL, "r0": 1.0, "params": {"rho0": 0.4}},
    "saturated_rat": {"kind": SATURATED_RATIONAL, "r0": 1.0, "params": {"rho0": 0.08}},
    "cubic_quintic": {"kind": POLYNOMIAL, "r0": 1.0, "coeffs": [-1.0, -3.0]},
    "quintic_sonic": {"kind": POLYNOMIAL, "r0": 1.0, "coeffs": [-2.0, 3.0, -4.0, 5.0, -12.0]},
}


def builtin_model(name: str) -> NonlinearityModel:
    if name not in BUILTIN_MODELS:
        raise ModelError(f"no builtin model {name!r}; known: {sorted(BUILTIN_MODELS)}")
    return make_model(BUILTIN_MODELS[name])


def kappa_family(kappa: float) -> NonlinearityModel:
    """Kink family f = (1-rho) + kappa (1-rho)^3, r0 = 1, c_s = sqrt(2)."""
    if kappa < 0:
        raise ModelError("kappa must be >= 0")
    return make_model({"kind": POLYNOMIAL, "r0": 1.0, "coeffs": [-1.0, 0.0, -float(kappa)]})
