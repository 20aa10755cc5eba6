"""Orbital distances and the untwisted momentum on sampled fields.

Two distances appear in the stability statements. The energy-space one,

    d_Z(psi, phi) = ||d_x psi - d_x phi||_L2 + || |psi| - |phi| ||_L2
                    + |psi(0) - phi(0)|,

is defined on any field; the hydrodynamical one,

    d_hy(psi, phi) = ||A - B||_H1 + ||u - v||_L2 + |arg(psi(0)/phi(0))|,

needs both fields bounded away from zero (A, B moduli; u, v phase
derivatives). Orbital statements minimize over translations y and global
phases theta; the phase only enters d_hy through the argument term, so its
minimization is exact, while d_Z gets a golden-section search and the
translation a coarse scan with parabolic refinement.
"""

from __future__ import annotations

import math
import warnings
from typing import Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline

from ..profile import WaveProfile

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DistanceError(ValueError):
    pass


def _dx4(y, h):
    d = np.empty_like(y)
    d[2:-2] = (-y[4:] + 8.0 * y[3:-1] - 8.0 * y[1:-3] + y[:-4]) / (12.0 * h)
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
    d[1] = (y[2] - y[0]) / (2.0 * h)
    d[-2] = (y[-1] - y[-3]) / (2.0 * h)
    d[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * h)
    return d


def _l2(f, h):
    return math.sqrt(float(np.sum(np.abs(f) ** 2)) * h)


def _hydro_parts(psi, x):
    h = float(x[1] - x[0])
    A = np.abs(psi)
    if A.min() <= 0.0:
        raise DistanceError("field vanishes; hydrodynamical lifting fails")
    dpsi = _dx4(psi, h)
    u = np.imag(np.conj(psi) * dpsi) / (A * A)
    return A, u


class _Shiftable:
    """Evaluates the reference's hydrodynamical parts or complex field at x - y."""

    def __init__(self, ref: Union[np.ndarray, WaveProfile], x: np.ndarray):
        self.x = x
        if isinstance(ref, WaveProfile):
            self.profile = ref
            self.psi0 = ref.field_of(x)
        else:
            self.profile = None
            self.psi0 = np.asarray(ref, dtype=complex)
            h = float(x[1] - x[0])
            self._re = CubicSpline(x, self.psi0.real)
            self._im = CubicSpline(x, self.psi0.imag)
            A, u = _hydro_parts(self.psi0, x) if np.abs(self.psi0).min() > 0 \
                else (np.abs(self.psi0), None)
            self._A = CubicSpline(x, A)
            self._u = CubicSpline(x, u) if u is not None else None

    def field(self, y):
        if self.profile is not None:
            return self.profile.field_of(self.x - y)
        xs = np.clip(self.x - y, self.x[0], self.x[-1])
        return self._re(xs) + 1j * self._im(xs)

    def hydro(self, y):
        if self.profile is not None:
            eta = self.profile.eta_of(self.x - y)
            A = np.sqrt(np.maximum(self.profile.model.r02 + eta, 0.0))
            return A, self.profile.u_of(self.x - y)
        if self._u is None:
            raise DistanceError("reference vanishes; hydrodynamical lifting fails")
        xs = np.clip(self.x - y, self.x[0], self.x[-1])
        return self._A(xs), self._u(xs)


def _scan_refine(fun, y_span, n_coarse=33, refinements=25):
    ys = np.linspace(-y_span, y_span, n_coarse)
    vals = np.array([fun(y) for y in ys])
    i = int(np.argmin(vals))
    lo = ys[max(i - 1, 0)]
    hi = ys[min(i + 1, len(ys) - 1)]
    # golden-section shrink on the bracketing interval
    a, b = lo, hi
    for _ in range(refinements):
        m1 = b - GOLDEN * (b - a)
        m2 = a + GOLDEN * (b - a)
        if fun(m1) <= fun(m2):
            b = m2
        else:
            a = m1
    y = 0.5 * (a + b)
    return min(vals[i], fun(y)), y


def hydrodynamic_distance(psi: np.ndarray, ref, x: np.ndarray,
                          minimize: bool = True,
                          y_span: Optional[float] = None) -> float:
    """d_hy, optionally minimized over translation and phase.

    With minimization the argument term vanishes identically (the optimal
    phase aligns the fields at x = 0), leaving the modulus H1 and velocity
    L2 mismatches minimized over the shift.
    """
    h = float(x[1] - x[0])
    A, u = _hydro_parts(psi, x)
    dA = _dx4(A, h)
    shift = _Shiftable(ref, x)

    def inner(y, with_arg):
        B, v = shift.hydro(y)
        dB = _dx4(B, h)
        val = math.sqrt(_l2(A - B, h) ** 2 + _l2(dA - dB, h) ** 2) + _l2(u - v, h)
        if with_arg:
            i0 = int(np.argmin(np.abs(x)))
            refpsi = shift.field(y)
            val += abs(float(np.angle(psi[i0] / refpsi[i0])))
        return val

    if not minimize:
        return inner(0.0, with_arg=True)
    if y_span is None:
        y_span = 0.25 * (x[-1] - x[0]) / 2.0
    best, _ = _scan_refine(lambda y: inner(y, with_arg=False), y_span)
    return best


def energy_space_distance(psi: np.ndarray, ref, x: np.ndarray,
                          minimize: bool = True,
                          y_span: Optional[float] = None) -> float:
    """d_Z, optionally minimized over translation and phase."""
    h = float(x[1] - x[0])
    dpsi = _dx4(psi, h)
    Apsi = np.abs(psi)
    i0 = int(np.argmin(np.abs(x)))
    shift = _Shiftable(ref, x)

    def at(y, theta):
        refpsi = shift.field(y) * np.exp(1j * theta)
        dref = _dx4(refpsi, h)
        return (_l2(dpsi - dref, h) + _l2(Apsi - np.abs(refpsi), h)
                + abs(psi[i0] - refpsi[i0]))

    def best_theta(y):
        refpsi = shift.field(y)
        dref = _dx4(refpsi, h)
        Aref = np.abs(refpsi)
        amp_term = _l2(Apsi - Aref, h)
        n1 = float(np.sum(np.abs(dpsi) ** 2)) * h
        n2 = float(np.sum(np.abs(dref) ** 2)) * h
        cross = complex(np.sum(dpsi * np.conj(dref))) * h

        def g(theta):
            grad = math.sqrt(max(n1 + n2 - 2.0 * (cross * np.exp(-1j * theta)).real, 0.0))
            return grad + amp_term + abs(psi[i0] - refpsi[i0] * np.exp(1j * theta))

        thetas = np.linspace(-math.pi, math.pi, 25)
        vals = [g(t) for t in thetas]
        i = int(np.argmin(vals))
        a = thetas[max(i - 1, 0)]
        b = thetas[min(i + 1, len(thetas) - 1)]
        for _ in range(40):
            m1 = b - GOLDEN * (b - a)
            m2 = a + GOLDEN * (b - a)
            if g(m1) <= g(m2):
                b = m2
            else:
                a = m1
        return min(vals[i], g(0.5 * (a + b)))

    if not minimize:
        return at(0.0, 0.0)
    if y_span is None:
        y_span = 0.25 * (x[-1] - x[0]) / 2.0
    best, _ = _scan_refine(best_theta, y_span)
    return best


def untwisted_momentum(psi: np.ndarray, x: np.ndarray, r0: float,
                       R_frac: float = 0.9, check_frac: float = 0.8) -> float:
    """Momentum extension to fields that may vanish, valued in (-pi r0^2, pi r0^2].

        P(R) = int_{-R}^{R} <i psi | d_x psi> dx
               - r0^2 (arg psi(R) - arg psi(-R)),

    reduced mod 2 pi r0^2, evaluated at R = R_frac L with a stability check
    at check_frac L. Requires |psi| within 1e-4 of r0 at both ends.
    """
    h = float(x[1] - x[0])
    L = min(abs(x[0]), abs(x[-1]))
    period = 2.0 * math.pi * r0 * r0

    def at_radius(R):
        mask = np.abs(x) <= R
        xi = x[mask]
        pj = psi[mask]
        if abs(abs(pj[0]) - r0) > 1e-4 * max(1.0, r0) or \
           abs(abs(pj[-1]) - r0) > 1e-4 * max(1.0, r0):
            raise DistanceError("field modulus is not at the background "
                                "amplitude at the evaluation radius")
        dens = np.imag(np.conj(pj) * _dx4(pj, h))
        total = float(np.trapezoid(dens, dx=h))
        total -= r0 * r0 * float(np.angle(pj[-1]) - np.angle(pj[0]))
        return _wrap(total, period)

    val = at_radius(R_frac * L)
    check = at_radius(check_frac * L)
    gap = abs(_wrap(val - check, period))
    if gap > 1e-6 * period:
        warnings.warn(f"untwisted momentum varies with the radius by {gap:.2e}; "
                      "the field has not settled to the background", RuntimeWarning)
    return val


def _wrap(v: float, period: float) -> float:
    # representative in (-period/2, period/2]; the branch cut maps to +period/2
    w = (v + period / 2.0) % period - period / 2.0
    if w == -period / 2.0:
        w = period / 2.0
    return w
