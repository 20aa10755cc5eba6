"""Travelling-wave profile construction from the first integral.

The modulus deviation eta = |U|^2 - r0^2 satisfies (eta')^2 = -W_c(eta), so
x(eta) is a monotone quadrature which we invert, rather than shooting the
Newton equation (the saddle at eta = 0 makes shooting blow through the
separatrix). The phase follows from d_x phi = (c/2) eta/(r0^2 + eta).

Gauge and translation are frozen by making |U| even and phi(0) = 0. Beyond
the stitch point (|eta| = 1e-8 |xi_c| for subsonic speeds) the profile
continues with its analytic tail: exponential with rate sqrt(c_s^2 - c^2)
below the sound speed, algebraic with exponent -2/(m+1) at it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import make_interp_spline

from ._quad import gauss_panel, stable_ratio
from .nonlinearity import NonlinearityModel
from .potential import KINK, SONIC, PotentialCurve, find_turning_point

# mesh resolution of the x(eta) inversion
TURNING_PANELS = 240
LOG_PANELS_PER_DECADE = 80
# stitch threshold relative to |xi_c|
TAIL_STITCH_REL = 1e-8
# default grid: points per decay length, and half-length in decay lengths
POINTS_PER_LENGTH = 160
LENGTHS_PER_SIDE = 30.0


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class TailInfo:
    kind: str                 # "exponential" | "algebraic"
    rate_or_exponent: float   # decay rate, or the (negative) power of x
    amplitude: float          # eta ~ amplitude exp(-rate x) or amplitude x^exponent
    x_stitch: float


@dataclass
class WaveProfile:
    """Sampled travelling wave with analytic continuation of its tail."""

    model: NonlinearityModel
    c: float
    xi_c: float
    status: str
    x: np.ndarray
    eta: np.ndarray
    A: np.ndarray
    u: np.ndarray
    phi: np.ndarray
    theta_c: Optional[float]
    tail: TailInfo
    h: float
    L: float
    is_kink: bool = False
    _eta_spline: object = None
    _phi_spline: object = None

    # evaluators cover the whole line (spline region plus analytic tail) so
    # that other modules can resample the wave on their own grids
    def eta_of(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        xs = self.tail.x_stitch
        out = np.empty_like(ax)
        inside = ax <= xs
        out[inside] = self._eta_spline(ax[inside])
        out[~inside] = self._tail_eta(ax[~inside])
        return out

    def u_of(self, x):
        if self.is_kink:
            return np.zeros_like(np.asarray(x, dtype=float))
        eta = self.eta_of(x)
        return 0.5 * self.c * eta / (self.model.r02 + eta)

    def phi_of(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_kink:
            return np.where(x < 0, np.pi, 0.0)
        ax = np.abs(x)
        xs = self.tail.x_stitch
        out = np.empty_like(ax)
        inside = ax <= xs
        out[inside] = self._phi_spline(ax[inside])
        out[~inside] = self._tail_phi(ax[~inside])
        return np.sign(x) * out

    def field_of(self, x):
        eta = self.eta_of(x)
        amp = np.sqrt(np.maximum(self.model.r02 + eta, 0.0))
        if self.is_kink:
            return np.sign(np.asarray(x, dtype=float)) * amp + 0.0j
        return amp * np.exp(1j * self.phi_of(x))

    def _tail_eta(self, ax):
        t = self.tail
        if t.kind == "exponential":
            return t.amplitude * np.exp(-t.rate_or_exponent * ax)
        return t.amplitude * ax ** t.rate_or_exponent

    def _tail_phi(self, ax):
        # integral of (c/(2 r0^2)) eta over the tail, measured from x_stitch
        t = self.tail
        c, r02 = self.c, self.model.r02
        phis = float(self._phi_spline(t.x_stitch))
        if t.kind == "exponential":
            rate = t.rate_or_exponent
            return phis + (c / (2.0 * r02)) / rate * (
                t.amplitude * np.exp(-rate * t.x_stitch) - t.amplitude * np.exp(-rate * ax))
        p = t.rate_or_exponent  # negative power
        if abs(p + 1.0) < 1e-12:
            return phis + (c / (2.0 * r02)) * t.amplitude * np.log(ax / t.x_stitch)
        return phis + (c / (2.0 * r02)) * t.amplitude * (
            ax ** (p + 1.0) - t.x_stitch ** (p + 1.0)) / (p + 1.0)


def solve_profile(model: NonlinearityModel, c: float,
                  h: Optional[float] = None, L: Optional[float] = None) -> WaveProfile:
    """Construct the travelling wave with speed c on a uniform symmetric grid.

    Raises ProfileError when no wave exists at c, and for sonic waves whose
    decay index is not in {0, 1, 2} (infinite energy).
    """
    verdict = find_turning_point(model, c)
    if verdict.status == "no_wave":
        raise ProfileError(f"no_wave: no travelling wave at c = {c}"
                           + (f" ({verdict.diagnostic})" if verdict.diagnostic else ""))
    if verdict.status == KINK:
        return _solve_kink(model, h, L)
    if verdict.status == SONIC:
        m = model.m_index
        if m is None:
            raise ProfileError("sonic wave with fully degenerate potential series")
        if m > 2:
            # the wave exists but has infinite energy; profile and decay fit
            # remain meaningful, energy/momentum integrals do not
            warnings.warn(f"sonic wave with m = {m} has infinite energy; "
                          "E and P integrals will not converge", RuntimeWarning)
        return _solve_sonic(model, verdict.xi_c, h, L)
    return _solve_subsonic(model, verdict.c, verdict.xi_c, verdict.status, h, L)


def complex_field(profile: WaveProfile) -> np.ndarray:
    """U_i = A_i exp(i phi_i); for kinks this is the signed real field."""
    if profile.is_kink:
        return np.sign(profile.x) * profile.A + 0.0j
    return profile.A * np.exp(1j * profile.phi)


@dataclass(frozen=True)
class DecayFit:
    kind: str
    rate_or_exponent: float
    amplitude: float


def fit_decay(profile: WaveProfile) -> DecayFit:
    """Least-squares fit of the tail decay on the window [0.6 L, 0.9 L].

    Exponential tails fit log|eta| against x; sonic tails fit log|eta|
    against log x. Errors out when the window has underflowed, in which
    case the profile should be rebuilt with a larger half-length.
    """
    mask = (profile.x >= 0.6 * profile.L) & (profile.x <= 0.9 * profile.L)
    eta = np.abs(profile.eta[mask])
    if eta.size < 8 or np.any(eta < 1e-280):
        raise ProfileError("tail window underflowed; rebuild with larger L")
    xw = profile.x[mask]
    if profile.tail.kind == "exponential":
        slope, intercept = np.polyfit(xw, np.log(eta), 1)
        return DecayFit("exponential", -float(slope), float(np.exp(intercept)))
    slope, intercept = np.polyfit(np.log(xw), np.log(eta), 1)
    return DecayFit("algebraic", float(slope), float(np.exp(intercept)))


# ---------------------------------------------------------------------------
# construction internals

def _grid(h, L):
    n = int(round(L / h))
    return np.linspace(-n * h, n * h, 2 * n + 1), n * h


def _invert_first_integral(model, c, xi_c, stop_rel=None, x_stop_target=None):
    """Tabulate x(eta) and phi(eta) from the turning value toward eta = 0.

    Region (a) uses the de-singularizing substitution eta = xi_c + d Delta t^2
    up to |eta| = |xi_c|/2; region (b) marches log-spaced |eta| panels either
    down to stop_rel |xi_c| or until x exceeds x_stop_target.
    """
    curve = PotentialCurve(model, c)
    r02 = model.r02
    d = -math.copysign(1.0, xi_c)          # direction of eta toward 0
    delta = abs(xi_c) / 2.0

    def u_of_eta(eta):
        return 0.5 * c * eta / (r02 + eta)

    # region (a): t in [0, 1]
    ts = np.linspace(0.0, 1.0, TURNING_PANELS + 1)
    xs = [0.0]
    phis = [0.0]

    def dx_dt(t):
        uu = delta * t * t
        g = stable_ratio(curve, xi_c, d, uu)
        return 2.0 * np.sqrt(delta / g)

    def dphi_dt(t):
        eta = xi_c + d * delta * t * t
        return u_of_eta(eta) * dx_dt(t)

    for i in range(TURNING_PANELS):
        xs.append(xs[-1] + gauss_panel(dx_dt, ts[i], ts[i + 1]))
        phis.append(phis[-1] + gauss_panel(dphi_dt, ts[i], ts[i + 1]))
    etas = list(xi_c + d * delta * ts ** 2)

    # region (b): log-spaced |eta|
    def dx_deta_abs(eta_abs):
        eta = math.copysign(1.0, xi_c) * eta_abs
        w = -curve.value(eta)
        return 1.0 / np.sqrt(w)

    def dphi_deta_abs(eta_abs):
        return u_of_eta(math.copysign(1.0, xi_c) * eta_abs) * dx_deta_abs(eta_abs)

    sgn = math.copysign(1.0, xi_c)
    lo = abs(xi_c) / 2.0
    if stop_rel is not None:
        hi = stop_rel * abs(xi_c)
        n_panels = max(64, int(LOG_PANELS_PER_DECADE * math.log10(lo / hi)))
        edges = np.exp(np.linspace(math.log(lo), math.log(hi), n_panels + 1))
        for i in range(n_panels):
            a, b = edges[i], edges[i + 1]   # a > b: |eta| shrinks while x grows
            xs.append(xs[-1] + gauss_panel(dx_deta_abs, b, a))
            phis.append(phis[-1] + gauss_panel(dphi_deta_abs, b, a))
            etas.append(sgn * b)
    else:
        # sonic: march fixed log steps until x_stop_target is passed
        step = 10.0 ** (-1.0 / LOG_PANELS_PER_DECADE)
        a = lo
        while xs[-1] < x_stop_target:
            b = a * step
            xs.append(xs[-1] + gauss_panel(dx_deta_abs, b, a))
            phis.append(phis[-1] + gauss_panel(dphi_deta_abs, b, a))
            etas.append(sgn * b)
            a = b
            if a < 1e-280:
                raise ProfileError("sonic inversion underflowed before target")
    return np.array(xs), np.array(etas), np.array(phis)


def _assemble(model, c, xi_c, status, x, L, h, xs, etas, phis, tail, theta_c,
              is_kink=False):
    # quintic interpolation: the first-integral residual test differentiates
    # these samples, which amplifies interpolation error by 1/h
    eta_spline = make_interp_spline(xs, etas, k=5)
    phi_spline = make_interp_spline(xs, phis, k=5)
    prof = WaveProfile(model=model, c=c, xi_c=xi_c, status=status, x=x,
                       eta=None, A=None, u=None, phi=None, theta_c=theta_c,
                       tail=tail, h=h, L=L, is_kink=is_kink,
                       _eta_spline=eta_spline, _phi_spline=phi_spline)
    prof.eta = prof.eta_of(x)
    prof.A = np.sqrt(np.maximum(model.r02 + prof.eta, 0.0))
    prof.u = prof.u_of(x)
    prof.phi = prof.phi_of(x)
    return prof


def _solve_subsonic(model, c, xi_c, status, h, L):
    rate = math.sqrt(model.c_s ** 2 - c * c)
    if L is None:
        L = LENGTHS_PER_SIDE / rate
    if h is None:
        h = 1.0 / (rate * POINTS_PER_LENGTH)
    x, L = _grid(h, L)
    xs, etas, phis = _invert_first_integral(model, c, xi_c, stop_rel=TAIL_STITCH_REL)
    x_stitch, eta_stitch, phi_stitch = xs[-1], etas[-1], phis[-1]
    amplitude = eta_stitch * math.exp(rate * x_stitch)
    tail = TailInfo("exponential", rate, amplitude, x_stitch)
    theta_c = phi_stitch + 0.5 * c / model.r02 * eta_stitch / rate
    return _assemble(model, c, xi_c, status, x, L, h, xs, etas, phis, tail, theta_c)


def _solve_sonic(model, xi_c, h, L):
    c = model.c_s
    m = model.m_index
    p = -2.0 / (m + 1)
    if L is None:
        # reach two decades of eta decay before the window, then pad
        xs0, etas0, _ = _invert_first_integral(model, c, xi_c, stop_rel=0.02)
        L = 1.25 * xs0[-1]
    if h is None:
        curve = PotentialCurve(model, c)
        core = math.sqrt(2.0 * abs(xi_c) / abs(curve.slope(xi_c)))
        h = core / POINTS_PER_LENGTH
    x, L = _grid(h, L)
    xs, etas, phis = _invert_first_integral(model, c, xi_c, x_stop_target=0.96 * L)
    x_stitch, eta_stitch, phi_stitch = xs[-1], etas[-1], phis[-1]
    amplitude = eta_stitch * x_stitch ** (-p)    # ratio-matched at the stitch
    tail = TailInfo("algebraic", p, amplitude, x_stitch)
    theta_c = None
    if m == 0:
        theta_c = phi_stitch + 0.5 * c / model.r02 * amplitude / x_stitch
    return _assemble(model, c, xi_c, SONIC, x, L, h, xs, etas, phis, tail, theta_c)


def _solve_kink(model, h, L):
    """c = 0 wave through zero: integrate x(s) = int ds/sqrt(F(s^2)), s = |U|."""
    r0 = model.r0
    cs = model.c_s
    if L is None:
        L = LENGTHS_PER_SIDE / cs
    if h is None:
        h = 1.0 / (cs * POINTS_PER_LENGTH)
    x, L = _grid(h, L)

    def dx_ds(s):
        return 1.0 / np.sqrt(model.F(s * s))

    ss = [0.0]
    xs = [0.0]
    # regular region: uniform amplitude mesh
    s_grid = np.linspace(0.0, 0.6 * r0, TURNING_PANELS + 1)
    for i in range(TURNING_PANELS):
        xs.append(xs[-1] + gauss_panel(dx_ds, s_grid[i], s_grid[i + 1]))
        ss.append(s_grid[i + 1])
    # tail region: log-spaced distance to the background amplitude;
    # stop where eta = s^2 - r0^2 reaches the 1e-8 |xi_0| stitch rule
    gap_stop = TAIL_STITCH_REL * r0 / 2.0
    lo, hi = 0.4 * r0, gap_stop * r0
    n_panels = max(64, int(LOG_PANELS_PER_DECADE * math.log10(lo / hi)))
    edges = np.exp(np.linspace(math.log(lo), math.log(hi), n_panels + 1))
    for i in range(n_panels):
        a, b = r0 - edges[i], r0 - edges[i + 1]
        xs.append(xs[-1] + gauss_panel(dx_ds, a, b))
        ss.append(b)
    xs = np.array(xs)
    ss = np.array(ss)
    etas = ss * ss - r0 * r0
    x_stitch, eta_stitch = xs[-1], etas[-1]
    amplitude = eta_stitch * math.exp(cs * x_stitch)
    tail = TailInfo("exponential", cs, amplitude, x_stitch)
    phis = np.zeros_like(xs)
    return _assemble(model, 0.0, -model.r02, KINK, x, L, h, xs, etas, phis,
                     tail, theta_c=math.pi / 2.0, is_kink=True)
