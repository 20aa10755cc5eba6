"""Effective Newton potential and per-speed existence classification.

The squared modulus deviation eta = |U|^2 - r0^2 of a travelling wave obeys
the Newton equation 2 eta'' + W_c'(eta) = 0 with the effective potential

    W_c(xi) = c^2 xi^2 - 4 (r0^2 + xi) F(r0^2 + xi),

which has a double root at xi = 0. A nontrivial wave corresponds to a
turning value xi_c with W_c(xi_c) = 0 != W_c'(xi_c) and W_c < 0 strictly
between 0 and xi_c.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .nonlinearity import NonlinearityModel

NO_WAVE = "no_wave"
DARK = "dark_with_xi"
BUBBLE_ABOVE = "bubble_above"
KINK = "kink"
SONIC = "sonic"

# scan parameters: initial step r0^2/512, refinement to 1e-12, upper bound
# 8 r0^2 for the above-background search (every builtin family has |xi_c| <= r0^2)
SCAN_STEPS = 512
SCAN_UPPER_FACTOR = 8.0
SONIC_REL_TOL = 1e-12


class PotentialError(ValueError):
    pass


@dataclass(frozen=True)
class PotentialCurve:
    """Evaluator pair (W_c, W_c') for a fixed speed."""

    model: NonlinearityModel
    c: float

    def value(self, xi):
        return newton_potential(self.model, self.c, xi)

    def slope(self, xi):
        return newton_potential_prime(self.model, self.c, xi)

    def curvature(self, xi):
        # W_c'' = 2c^2 + 4[2 f + (r0^2+xi) f'](r0^2+xi); used by the
        # turning-point quadratures to stabilize near-root evaluation
        m, rho = self.model, self.model.r02 + np.asarray(xi, dtype=float)
        return 2.0 * self.c ** 2 + 4.0 * (2.0 * m.f(rho) + rho * m.df(rho))


@dataclass(frozen=True)
class ExistenceVerdict:
    status: str
    xi_c: Optional[float]
    c: float
    other_roots: bool = False     # a second admissible root exists further out
    diagnostic: str = ""


def newton_potential(model: NonlinearityModel, c: float, xi):
    """W_c(xi) = c^2 xi^2 - 4 (r0^2+xi) F(r0^2+xi); requires xi >= -r0^2."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < -model.r02 - 1e-15 * model.r02):
        raise PotentialError("xi below -r0^2 is outside the physical domain")
    rho = np.maximum(model.r02 + xi_arr, 0.0)
    out = c * c * xi_arr ** 2 - 4.0 * rho * model.F(rho)
    return float(out) if out.ndim == 0 else out


def newton_potential_prime(model: NonlinearityModel, c: float, xi):
    """W_c'(xi) = 2 c^2 xi - 4 F(r0^2+xi) + 4 (r0^2+xi) f(r0^2+xi)."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < -model.r02 - 1e-15 * model.r02):
        raise PotentialError("xi below -r0^2 is outside the physical domain")
    rho = np.maximum(model.r02 + xi_arr, 0.0)
    out = 2.0 * c * c * xi_arr - 4.0 * model.F(rho) + 4.0 * rho * model.f(rho)
    return float(out) if out.ndim == 0 else out


def find_turning_point(model: NonlinearityModel, c: float) -> ExistenceVerdict:
    """Locate the turning value xi_c nearest 0 and classify the wave at speed c.

    Scans outward from 0 in both directions (step r0^2/512, brentq refinement
    to 1e-12), keeping the zero of W_c nearest 0 with W_c < 0 strictly
    between. Verdicts: kink iff the zero is -r0^2 at c = 0; sonic iff
    |c - c_s| <= 1e-12 c_s and a valid turning value exists; no_wave when
    no admissible sign change is found up to 8 r0^2 or c > c_s.
    """
    if c < 0:
        raise PotentialError("speed must be nonnegative")
    r02 = model.r02
    cs = model.c_s
    sonic = abs(c - cs) <= SONIC_REL_TOL * cs
    if c > cs and not sonic:
        return ExistenceVerdict(NO_WAVE, None, c, diagnostic="supersonic speed")
    if sonic:
        c = cs

    W = lambda xi: newton_potential(model, c, xi)
    step = r02 / SCAN_STEPS

    roots = []
    diagnostics = []
    # downward scan, bounded by the vacuum xi = -r0^2
    root, diag = _scan_direction(W, step, -1.0, r02, SCAN_UPPER_FACTOR * r02)
    if root is not None:
        roots.append(root)
    diagnostics.append(diag)
    # upward scan
    root, diag = _scan_direction(W, step, +1.0, r02, SCAN_UPPER_FACTOR * r02)
    if root is not None:
        roots.append(root)
    diagnostics.append(diag)

    kink_possible = (c == 0.0 and not roots and _vanishes_at_vacuum(model))
    if kink_possible:
        return ExistenceVerdict(KINK, -r02, 0.0)

    if not roots:
        msg = "; ".join(d for d in diagnostics if d)
        return ExistenceVerdict(NO_WAVE, None, c, diagnostic=msg)

    xi_c = min(roots, key=abs)
    other = len(roots) > 1

    # require a simple zero; degenerate turning points break the construction
    slope = newton_potential_prime(model, c, xi_c)
    scale = max(1.0, abs(newton_potential_prime(model, c, xi_c / 2.0)))
    if abs(slope) <= 1e-10 * scale and not (sonic and (model.m_index or 0) >= 1):
        return ExistenceVerdict(NO_WAVE, None, c, other_roots=other,
                                diagnostic=f"degenerate turning value at {xi_c:.6g}")

    if sonic:
        return ExistenceVerdict(SONIC, xi_c, c, other_roots=other)
    if xi_c > 0:
        return ExistenceVerdict(BUBBLE_ABOVE, xi_c, c, other_roots=other)
    return ExistenceVerdict(DARK, xi_c, c, other_roots=other)


def _scan_direction(W, step, direction, r02, upper):
    """March from 0 in one direction until W changes sign; refine by brentq."""
    limit = r02 if direction < 0 else upper
    n_max = int(np.ceil(limit / step)) + 1
    xs = direction * np.minimum(np.arange(1, n_max + 1) * step, limit)
    vals = W(xs)
    pos = np.nonzero(vals > 0.0)[0]
    if pos.size:
        k = int(pos[0])
        x, x_prev = xs[k], (xs[k - 1] if k > 0 else 0.0)
        lo, hi = (x, x_prev) if direction < 0 else (x_prev, x)
        root = brentq(W, lo, hi, xtol=1e-12)
        return float(root), ""
    zero = np.nonzero((vals == 0.0) & (np.abs(xs) < limit))[0]
    if zero.size:
        return float(xs[int(zero[0])]), ""
    return None, f"no sign change toward {'-' if direction < 0 else '+'}infinity"


def _vanishes_at_vacuum(model: NonlinearityModel) -> bool:
    # kink needs W_0(-r0^2) = 0 with a simple zero, i.e. F(0) > 0,
    # and W_0 < 0 strictly inside (-r0^2, 0)
    if model.F(0.0) <= 0.0:
        return False
    xi = np.linspace(-model.r02 * (1 - 1e-6), -model.r02 * 1e-6, 2048)
    return bool(np.all(newton_potential(model, 0.0, xi) < 0.0))


def kink_turning_expansion_residual(model: NonlinearityModel, c: float) -> float:
    """|xi_c - (-r0^2 + c^2 r0^4 / (4 F(0)))|, which must be O(c^4).

    Only defined for kink-bearing models (F(0) > 0 and a kink at c = 0).
    """
    v0 = find_turning_point(model, 0.0)
    if v0.status != KINK:
        raise PotentialError("model has no kink; the small-c expansion does not apply")
    v = find_turning_point(model, c)
    if v.xi_c is None:
        raise PotentialError(f"no wave at c = {c}")
    r02 = model.r02
    predicted = -r02 + c * c * r02 ** 2 / (4.0 * model.F(0.0))
    return abs(v.xi_c - predicted)
