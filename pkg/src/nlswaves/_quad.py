"""Turning-point quadrature helpers shared by the profile and invariant code.

All first-integral quantities reduce to integrals of w(xi)/sqrt(-W_c(xi))
between the turning value xi_c (a simple zero of W_c, hence an integrable
inverse-square-root singularity) and some xi nearer 0. The substitution
xi = xi_c + d u with u = Delta t^2 removes the singularity; the remaining
division -W_c(xi)/u is evaluated through a Taylor switch near u = 0 to
avoid cancellation at the root.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .potential import PotentialCurve

GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(12)


def stable_ratio(curve: PotentialCurve, xi_c: float, d: float, u):
    """G(u) = -W_c(xi_c + d u)/u, finite and positive down to u = 0."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    out = np.empty_like(u)
    small = u < 1e-6 * max(abs(xi_c), 1e-30)
    if np.any(~small):
        uu = u[~small]
        out[~small] = -curve.value(xi_c + d * uu) / uu
    if np.any(small):
        wp = curve.slope(xi_c)
        wpp = curve.curvature(xi_c)
        uu = u[small]
        out[small] = -d * wp - 0.5 * wpp * uu
    return float(out[0]) if scalar else out


def turning_integral(curve: PotentialCurve, xi_c: float, weight,
                     tol: float = 1e-12) -> float:
    """integral_0^{xi_c} weight(xi) dxi / sqrt(-W_c(xi)), signed like xi_c.

    Uses xi = xi_c (1 - t^2): the integrand becomes smooth on t in [0, 1].
    """
    a = abs(xi_c)

    def integrand(t):
        # dxi/sqrt(-W) = 2 sqrt(a/G) dt with -W = (a t^2) G
        xi = xi_c * (1.0 - t * t)
        g = stable_ratio(curve, xi_c, -np.sign(xi_c), a * t * t)
        if g <= 0.0:
            return 0.0
        return weight(xi) * 2.0 * np.sqrt(a / g)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(integrand, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=400)
    return float(np.sign(xi_c)) * val


def gauss_panel(fun, a: float, b: float) -> float:
    """12-point Gauss-Legendre on [a, b] for smooth integrands."""
    mid, rad = 0.5 * (a + b), 0.5 * (b - a)
    return rad * float(np.sum(GAUSS_WEIGHTS * fun(mid + rad * GAUSS_NODES)))
