"""Energy, momentum, branch diagrams and the stability classification.

Two independent routes to the momentum are kept deliberately separate: the
turning-point quadrature in the modulus variable,

    P(c) = c sgn(xi_c) integral_0^{xi_c} xi^2/(r0^2+xi) dxi/sqrt(-W_c(xi)),

and the grid integral of eta * d_x phi over a sampled profile. Branch
derivatives use Richardson-extrapolated central differences with a step
that shrinks near the sound speed, where the branch flattens.

Stability verdicts on a branch point: dP/dc < 0 stable, dP/dc > 0 unstable,
dP/dc = 0 with d2P/dc2 != 0 a cusp (unstable). At c = 0 the rules change:
a kink is stable iff its momentum slope is negative, a bubble is always
unstable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad, simpson

from ._quad import turning_integral
from .nonlinearity import NonlinearityModel
from .potential import KINK, NO_WAVE, PotentialCurve, find_turning_point
from .profile import WaveProfile, complex_field, solve_profile

STABLE = "stable"
UNSTABLE = "unstable"
CUSP_UNSTABLE = "cusp_unstable"
UNDETERMINED = "undetermined"

# cusp detection tolerances; chosen to separate the GP branch
# (|dP/dc| >= 2 sqrt(c_s^2 - c^2) scale) from constructed cusp families
CUSP_SLOPE_TOL = 1e-4
CUSP_CURV_TOL = 1e-2


class InvariantError(ValueError):
    pass


# ---------------------------------------------------------------------------
# scalar invariants of a sampled profile

def _dx4(y: np.ndarray, h: float) -> np.ndarray:
    """4th-order centered first derivative, 2nd-order one-sided at edges."""
    d = np.empty_like(y)
    d[2:-2] = (-y[4:] + 8.0 * y[3:-1] - 8.0 * y[1:-3] + y[:-4]) / (12.0 * h)
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
    d[1] = (y[2] - y[0]) / (2.0 * h)
    d[-2] = (y[-1] - y[-3]) / (2.0 * h)
    d[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * h)
    return d


def energy(profile: WaveProfile) -> float:
    """E = integral |d_x U|^2 + F(|U|^2) over the grid, plus tail correction."""
    model = profile.model
    U = complex_field(profile)
    dU = _dx4(U, profile.h)
    dens = np.abs(dU) ** 2 + model.F(np.abs(U) ** 2)
    val = simpson(dens, dx=profile.h)
    return val + _tail_quadratic(profile, model.c_s ** 2 / (2.0 * model.r02), "energy")


def momentum_grid(profile: WaveProfile) -> float:
    """P = integral eta * d_x phi over the grid, plus tail correction.

    For the exact kink the integrand vanishes identically (the pi phase
    jump carries the momentum as a point mass at the origin); the grid
    route returns 0 there and untwisted_momentum recovers r0^2 pi.
    """
    val = simpson(profile.eta * profile.u, dx=profile.h)
    coeff = profile.c / (2.0 * profile.model.r02)
    return val + _tail_quadratic(profile, coeff, "momentum")


def _tail_quadratic(profile: WaveProfile, coeff: float, what: str) -> float:
    """Analytic integral of coeff * eta^2 over the two discarded tails."""
    t = profile.tail
    L = profile.L
    eta_L = float(profile.eta_of(np.array([L]))[0])
    if t.kind == "exponential":
        return coeff * eta_L ** 2 / t.rate_or_exponent
    p = 2.0 * t.rate_or_exponent        # eta^2 ~ amp^2 x^p
    if p >= -1.0:
        raise InvariantError(f"{what} integral diverges for this sonic tail")
    corr = 2.0 * coeff * eta_L ** 2 * L / (-p - 1.0)
    if what == "energy" and profile.model.m_index == 2:
        ref = abs(coeff) * max(profile.xi_c ** 2, 1e-30)
        if corr > 1e-6 * ref:
            warnings.warn("slow sonic tail convergence (m = 2); energy tail "
                          f"correction {corr:.3e}", RuntimeWarning)
    return corr


# ---------------------------------------------------------------------------
# xi-space quadratures along the branch

def momentum_quadrature(model: NonlinearityModel, c: float) -> float:
    """Momentum from the turning-point quadrature; no profile required.

    At c = 0 a kink-bearing model returns the branch limit r0^2 pi
    (the pointwise integral is not defined there); a bubble returns 0.
    """
    verdict = find_turning_point(model, c)
    if verdict.status == NO_WAVE:
        raise InvariantError(f"no travelling wave at c = {c}: {verdict.diagnostic}")
    if verdict.status == KINK:
        return model.r02 * math.pi
    if c == 0.0:
        return 0.0
    curve = PotentialCurve(model, verdict.c)
    r02 = model.r02
    val = turning_integral(curve, verdict.xi_c, lambda xi: xi * xi / (r02 + xi))
    return verdict.c * math.copysign(1.0, verdict.xi_c) * val


def energy_quadrature(model: NonlinearityModel, c: float) -> float:
    """Energy from the same change of variables: 4 |int F(r0^2+xi)/sqrt(-W_c)|."""
    verdict = find_turning_point(model, c)
    if verdict.status == NO_WAVE:
        raise InvariantError(f"no travelling wave at c = {c}: {verdict.diagnostic}")
    if verdict.status == KINK:
        return kink_energy(model)
    curve = PotentialCurve(model, verdict.c)
    r02 = model.r02
    val = turning_integral(curve, verdict.xi_c, lambda xi: model.F(r02 + xi))
    return 4.0 * abs(val)


# ---------------------------------------------------------------------------
# kink and bubble endpoint formulas

def kink_energy(model: NonlinearityModel) -> float:
    """E_kink = 2 int_0^{r0^2} sqrt(F(rho)/rho) drho = 4 int_0^{r0} sqrt(F(s^2)) ds."""
    _require_kink(model)
    val, _ = quad(lambda s: math.sqrt(model.F(s * s)), 0.0, model.r0,
                  epsabs=1e-13, epsrel=1e-13, limit=300)
    return 4.0 * val


def kink_momentum_slope(model: NonlinearityModel) -> dict:
    """dP/dc at c = 0 for a kink, and the Vakhitov-Kolokolov limit value.

    dP/dc|_0 = -8 r0^3/(3 sqrt(F(0)))
               + (1/2) int_0^{r0^2} (rho-r0^2)^2 rho^{-3/2}
                       (F(rho)^{-1/2} - F(0)^{-1/2}) drho,
    with the rho = s^2 substitution absorbing the integrable endpoint weight.
    VK0 = dP/dc|_0 / (2 sqrt(2)).
    """
    _require_kink(model)
    r0, r02 = model.r0, model.r02
    F0 = model.F(0.0)
    inv_sqrt_F0 = 1.0 / math.sqrt(F0)

    def integrand(s):
        rho = s * s
        diff = model.F(rho) ** -0.5 - inv_sqrt_F0
        return 2.0 * (rho - r02) ** 2 / (s * s) * diff if s > 0 else 0.0

    val, _ = quad(integrand, 0.0, r0, epsabs=1e-13, epsrel=1e-13, limit=300)
    dpdc0 = -8.0 * r0 ** 3 / (3.0 * math.sqrt(F0)) + 0.5 * val
    return {"dPdc0": dpdc0, "VK0": dpdc0 / (2.0 * math.sqrt(2.0))}


def bubble_momentum_slope(model: NonlinearityModel) -> float:
    """dP/dc at c = 0 for a stationary bubble; strictly positive.

    Errors out on kinks (the integrand is not integrable at xi = -r0^2;
    use kink_momentum_slope instead).
    """
    verdict = find_turning_point(model, 0.0)
    if verdict.status == KINK:
        raise InvariantError("model has a kink at c = 0, not a bubble")
    if verdict.status == NO_WAVE or verdict.xi_c in (None, 0.0):
        raise InvariantError("no stationary bubble for this model")
    curve = PotentialCurve(model, 0.0)
    r02 = model.r02
    val = turning_integral(curve, verdict.xi_c, lambda xi: xi * xi / (r02 + xi))
    return abs(val)


def _require_kink(model):
    if find_turning_point(model, 0.0).status != KINK:
        raise InvariantError("model has no kink (F(0) <= 0 or W_0 has interior zeros)")


# ---------------------------------------------------------------------------
# branch diagrams

@dataclass(frozen=True)
class BranchPoint:
    c: float
    E: float
    P: float
    dPdc: float
    d2Pdc2: float
    verdict: str
    xi_c: Optional[float] = None
    hamilton_residual: float = float("nan")
    one_sided: bool = False


@dataclass
class BranchDiagram:
    points: list
    gaps: list = field(default_factory=list)          # speeds with no wave
    kink: Optional[dict] = None                       # P_limit, dPdc_at_0, E_kink
    notes: list = field(default_factory=list)         # cusp locations etc


def compute_diagram(model: NonlinearityModel, c_min: float, c_max: float,
                    n: int, workers: int = 1) -> BranchDiagram:
    """Sweep the branch on [c_min, c_max] and classify every point.

    Speeds without a wave are recorded as gaps, not errors. Endpoint speeds
    where the centered stencil would leave the branch fall back to one-sided
    differences and are flagged.
    """
    if not (0.0 <= c_min < c_max <= model.c_s * (1 + 1e-12)):
        raise InvariantError("require 0 <= c_min < c_max <= c_s")
    cs = np.linspace(c_min, c_max, n)
    points, gaps = [], []
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(partial(_branch_point, model),
                                    [float(c) for c in cs]))
    else:
        results = [_branch_point(model, float(c)) for c in cs]
    for c, pt in zip(cs, results):
        if pt is None:
            gaps.append(float(c))
        else:
            points.append(pt)
    notes = []
    for a, b in zip(points[:-1], points[1:]):
        if np.isfinite(a.dPdc) and np.isfinite(b.dPdc) and a.dPdc * b.dPdc < 0:
            notes.append(f"dP/dc changes sign in ({a.c:.6g}, {b.c:.6g})")
    kink_block = None
    if find_turning_point(model, 0.0).status == KINK:
        slope = kink_momentum_slope(model)
        kink_block = {
            "P_limit": extrapolate_momentum_to_zero(model),
            "dPdc_at_0": slope["dPdc0"],
            "VK0": slope["VK0"],
            "E_kink": kink_energy(model),
        }
    return BranchDiagram(points=points, gaps=gaps, kink=kink_block, notes=notes)


def _branch_point(model, c, slope_only=False):
    verdict = find_turning_point(model, c)
    if verdict.status == NO_WAVE:
        return None
    if verdict.status == KINK or (c == 0.0 and verdict.xi_c is not None):
        return _zero_speed_point(model, verdict)

    P = momentum_quadrature(model, c)
    E = energy_quadrature(model, c)
    dPdc, d2P, one_sided = _branch_derivatives(model, c, momentum_quadrature)
    dEdc, _, _ = _branch_derivatives(model, c, energy_quadrature, second=False)
    resid = abs(dEdc - c * dPdc) / max(1.0, abs(dEdc))
    verdict_str = _classify_slope(model, P, dPdc, d2P)
    return BranchPoint(c=c, E=E, P=P, dPdc=dPdc, d2Pdc2=d2P, verdict=verdict_str,
                       xi_c=verdict.xi_c, hamilton_residual=resid, one_sided=one_sided)


def _zero_speed_point(model, verdict):
    if verdict.status == KINK:
        slope = kink_momentum_slope(model)["dPdc0"]
        return BranchPoint(c=0.0, E=kink_energy(model), P=model.r02 * math.pi,
                           dPdc=slope, d2Pdc2=float("nan"),
                           verdict=STABLE if slope < 0 else UNSTABLE,
                           xi_c=-model.r02, one_sided=True)
    slope = bubble_momentum_slope(model)
    return BranchPoint(c=0.0, E=energy_quadrature(model, 0.0), P=0.0,
                       dPdc=slope, d2Pdc2=float("nan"), verdict=UNSTABLE,
                       xi_c=verdict.xi_c, one_sided=True)


def _classify_slope(model, P, dPdc, d2P):
    tol = CUSP_SLOPE_TOL * max(1.0, abs(P) / model.c_s)
    if dPdc < -tol:
        return STABLE
    if dPdc > tol:
        return UNSTABLE
    if np.isfinite(d2P) and abs(d2P) > CUSP_CURV_TOL:
        return CUSP_UNSTABLE
    return UNDETERMINED


def _exists(model, c):
    if c <= 0 or c >= model.c_s:
        return False
    return find_turning_point(model, c).status not in (NO_WAVE,)


def _branch_derivatives(model, c, quantity, second=True):
    """Richardson-extrapolated dQ/dc (and d2Q/dc2) along the branch at c."""
    h = max(1e-3, 0.01 * (model.c_s - c))
    for _ in range(3):
        if _exists(model, c - h) and _exists(model, c + h):
            break
        h *= 0.5
    else:
        return _one_sided_derivatives(model, c, quantity, second)
    Qm2, Qm1 = quantity(model, c - h), quantity(model, c - h / 2)
    Qp1, Qp2 = quantity(model, c + h / 2), quantity(model, c + h)
    D_h = (Qp2 - Qm2) / (2 * h)
    D_h2 = (Qp1 - Qm1) / h
    dQ = (4 * D_h2 - D_h) / 3.0
    if not second:
        return dQ, float("nan"), False
    Q0 = quantity(model, c)
    S_h = (Qp2 - 2 * Q0 + Qm2) / (h * h)
    S_h2 = (Qp1 - 2 * Q0 + Qm1) / (h * h / 4)
    d2Q = (4 * S_h2 - S_h) / 3.0
    return dQ, d2Q, False


def _one_sided_derivatives(model, c, quantity, second=True):
    h = max(1e-3, 0.01 * (model.c_s - c))
    sgn = 1.0 if _exists(model, c + h) else -1.0
    h *= sgn
    cands = [c + k * h for k in (1, 2, 3)]
    if not all(_exists(model, ck) for ck in cands):
        return float("nan"), float("nan"), True
    Q0 = quantity(model, c)
    Q1, Q2, Q3 = (quantity(model, ck) for ck in cands)
    dQ = (-3 * Q0 + 4 * Q1 - Q2) / (2 * h)
    d2Q = (2 * Q0 - 5 * Q1 + 4 * Q2 - Q3) / (h * h) if second else float("nan")
    return dQ, d2Q, True


def extrapolate_momentum_to_zero(model: NonlinearityModel,
                                 c_samples=None) -> float:
    """Quadratic Richardson extrapolation of P(c) to c = 0 on a kink branch."""
    if c_samples is None:
        c_samples = model.c_s * np.array([0.03, 0.015, 0.0075])
    cs = np.asarray(c_samples, dtype=float)
    Ps = np.array([momentum_quadrature(model, c) for c in cs])
    coeffs = np.polyfit(cs, Ps, 2)
    return float(np.polyval(coeffs, 0.0))


def momentum_pair_gap(model: NonlinearityModel, c: float,
                      h: Optional[float] = None, L: Optional[float] = None) -> float:
    """|momentum_grid - momentum_quadrature| at one branch point."""
    prof = solve_profile(model, c, h=h, L=L)
    return abs(momentum_grid(prof) - momentum_quadrature(model, c))
