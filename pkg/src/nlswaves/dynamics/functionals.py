"""Conserved functionals evaluated on sampled complex fields.

field_energy and field_momentum are the plain grid quadratures of

    E(psi) = int |d_x psi|^2 + F(|psi|^2) dx,
    P(psi) = int <i psi | d_x psi> (1 - r0^2/|psi|^2) dx,

the momentum in the lifted form, hence only for non-vanishing fields.
liapunov_functional is the penalized action whose local minimizer is the
stable wave; kink_functional replaces the momentum by its mod-2 pi r0^2
extension so that it survives fields that vanish.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import simpson

from ..nonlinearity import NonlinearityModel
from .distances import DistanceError, _dx4, untwisted_momentum


def field_energy(model: NonlinearityModel, psi: np.ndarray, h: float) -> float:
    dpsi = _dx4(psi, h)
    dens = np.abs(dpsi) ** 2 + model.F(np.abs(psi) ** 2)
    return float(simpson(dens, dx=h))


def field_momentum(model: NonlinearityModel, psi: np.ndarray, h: float) -> float:
    a2 = np.abs(psi) ** 2
    if a2.min() <= 0.0:
        raise DistanceError("field vanishes; use untwisted_momentum instead")
    dens = np.imag(np.conj(psi) * _dx4(psi, h)) * (1.0 - model.r02 / a2)
    return float(simpson(dens, dx=h))


def liapunov_functional(model: NonlinearityModel, psi: np.ndarray, h: float,
                        c_star: float, M: float, P_ref: float,
                        dPdc: float = None) -> float:
    """E - c* P + (M/2)(P - P_ref)^2 on a non-vanishing field.

    M must be positive; when the branch slope is supplied, M must also
    exceed 1/(-dP/dc), the threshold above which the penalized action is
    a Liapunov functional at a stable point.
    """
    if M <= 0:
        raise ValueError("penalty weight M must be positive")
    if dPdc is not None:
        if dPdc >= 0:
            raise ValueError("minimality requires a stable point (dP/dc < 0)")
        if M <= 1.0 / (-dPdc):
            raise ValueError(f"M = {M:.6g} below the threshold "
                             f"1/(-dP/dc) = {1.0 / (-dPdc):.6g}")
    E = field_energy(model, psi, h)
    P = field_momentum(model, psi, h)
    return E - c_star * P + 0.5 * M * (P - P_ref) ** 2


def kink_functional(model: NonlinearityModel, psi: np.ndarray, x: np.ndarray,
                    M: float) -> float:
    """E + 2 M r0^4 sin^2((P_untwisted - pi r0^2)/(2 r0^2)); defined on all
    of the energy class, equal to E at the kink itself."""
    if M <= 0:
        raise ValueError("penalty weight M must be positive")
    h = float(x[1] - x[0])
    E = field_energy(model, psi, h)
    p = untwisted_momentum(psi, x, model.r0)
    r02 = model.r02
    return E + 2.0 * M * r02 ** 2 * math.sin((p - math.pi * r02) / (2.0 * r02)) ** 2


def amplitude_energy_floor(model: NonlinearityModel, mu: float) -> float:
    """Lower bound 4 int_mu^{r0} sqrt(F(s^2)) ds on the energy of any field
    whose modulus dips to mu; at mu = 0 this is the kink energy."""
    from scipy.integrate import quad
    val, _ = quad(lambda s: math.sqrt(max(model.F(s * s), 0.0)), mu, model.r0,
                  epsabs=1e-12, epsrel=1e-12, limit=200)
    return 4.0 * val
