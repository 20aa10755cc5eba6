"""Semi-implicit time integration of the NLS flow in a co-moving frame.

The frame shift adds -i c d_x to the linear part, so reference waves of
speed c are stationary and distance minimization stays local. One step of
the scheme solves

    i (psi' - psi)/dt + (K psi' + K psi)/2 + q (psi' + psi)/2 = 0,

with K the 4th-order d_xx - i c d_x stencil and q the discrete gradient of
the potential density, q = -(F(|psi'|^2) - F(|psi|^2))/(|psi'|^2 - |psi|^2),
relaxed by fixed-point iteration. The discrete-gradient choice makes the
scheme conserve the discrete frame Hamiltonian exactly (up to the solver
tolerance) for any nonlinearity; it is unconditionally stable and second
order in time, so the dt <= guard * h^2 condition is an accuracy advisory
only. The outer 2% of the grid is clamped to the reference far field;
profiles decay exponentially and runs are expected to stop before
radiation reaches the clamp.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from ..nonlinearity import NonlinearityModel
from .distances import energy_space_distance, hydrodynamic_distance, untwisted_momentum
from .functionals import field_energy, field_momentum

CLAMP_FRACTION = 0.02
ACCURACY_GUARD = 40.0          # warn when dt > guard * h^2
FIXED_POINT_TOL = 1e-13
FIXED_POINT_MAX_ITER = 12
BOUNDARY_DRIFT_TOL = 1e-6


class DynamicsError(ValueError):
    pass


@dataclass
class FieldState:
    psi: np.ndarray
    x: np.ndarray
    t: float = 0.0
    c_frame: float = 0.0


@dataclass
class RunDiagnostics:
    t: np.ndarray
    energy: np.ndarray
    momentum: np.ndarray              # grid momentum, or untwisted if requested
    momentum_kind: str
    mode_amp: Optional[np.ndarray] = None
    d_hy: Optional[np.ndarray] = None
    d_Z: Optional[np.ndarray] = None
    boundary_drift: float = 0.0


def evolve(model: NonlinearityModel, initial: FieldState, T: float, dt: float,
           reference: Optional[np.ndarray] = None,
           mode_real: Optional[np.ndarray] = None,
           out_stride: int = 10,
           track_distances: bool = False,
           untwisted: bool = False,
           untwisted_fracs: tuple = (0.9, 0.8),
           keep_snapshots: bool = False,
           distance_kwargs: Optional[dict] = None):
    """March the field to time T; returns (final_state, diagnostics[, snaps]).

    reference: stationary wave in this frame, used for the boundary clamp
    and as the base point of mode_amp and distance diagnostics. mode_real:
    Re w of a linear mode; its grid inner product with psi - reference is
    recorded as the tracked amplitude.
    """
    x = initial.x
    h = float(x[1] - x[0])
    N = x.size
    c = initial.c_frame
    if dt > ACCURACY_GUARD * h * h:
        warnings.warn(f"dt = {dt:.3g} above the accuracy guard "
                      f"{ACCURACY_GUARD:.0f} h^2 = {ACCURACY_GUARD * h * h:.3g}; "
                      "the scheme stays stable but slow phases decohere",
                      RuntimeWarning)
    psi = initial.psi.astype(complex).copy()
    ref = reference if reference is not None else psi.copy()
    n_clamp = max(2, int(CLAMP_FRACTION * N))

    # banded K = D2 - i c D1, 4th-order interior; ghost cells are filled with
    # the reference boundary values (the far field is constant to the tail
    # accuracy), which enters the solve as a fixed right-hand-side correction
    c2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    c1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * h)
    kdiags = c2 - 1j * c * c1

    ghost = np.zeros(N, dtype=complex)
    ghost[0] = kdiags[0] * ref[0] + kdiags[1] * ref[0]
    ghost[1] = kdiags[0] * ref[0]
    ghost[-2] = kdiags[4] * ref[-1]
    ghost[-1] = kdiags[4] * ref[-1] + kdiags[3] * ref[-1]

    def apply_K(v):
        out = kdiags[2] * v + ghost
        out[1:] += kdiags[1] * v[:-1]
        out[:-1] += kdiags[3] * v[1:]
        out[2:] += kdiags[0] * v[:-2]
        out[:-2] += kdiags[4] * v[2:]
        return out

    ab_base = np.zeros((5, N), dtype=complex)
    ab_base[0, 2:] = 0.5 * kdiags[4]
    ab_base[1, 1:] = 0.5 * kdiags[3]
    ab_base[2, :] = 1j / dt + 0.5 * kdiags[2]
    ab_base[3, :-1] = 0.5 * kdiags[1]
    ab_base[4, :-2] = 0.5 * kdiags[0]

    def discrete_gradient(a, b):
        d = a - b
        mid = model.f(0.5 * (a + b))
        big = np.abs(d) > 1e-12 * np.maximum(1.0, np.abs(a))
        out = np.where(big, -(model.F(np.where(big, a, 1.0)) -
                              model.F(np.where(big, b, 0.0))) / np.where(big, d, 1.0),
                       mid)
        return out

    n_steps = int(round(T / dt))
    times, energies, momenta, amps, dhys, dzs = [], [], [], [], [], []
    snaps = []
    dkw = distance_kwargs or {}
    boundary_drift = 0.0
    scale = max(1.0, float(np.max(np.abs(psi))))

    def record(t, psi):
        times.append(t)
        energies.append(field_energy(model, psi, h))
        if untwisted:
            momenta.append(untwisted_momentum(psi, x, model.r0,
                                              R_frac=untwisted_fracs[0],
                                              check_frac=untwisted_fracs[1]))
        else:
            momenta.append(field_momentum(model, psi, h))
        if mode_real is not None:
            amps.append(h * float(np.sum((psi - ref).real * mode_real)))
        if track_distances:
            dhys.append(hydrodynamic_distance(psi, ref, x, **dkw))
            dzs.append(energy_space_distance(psi, ref, x, **dkw))
        if keep_snapshots:
            snaps.append(FieldState(psi.copy(), x, t, c))

    record(initial.t, psi)
    t = initial.t
    prev = psi.copy()
    for n in range(n_steps):
        b = np.abs(psi) ** 2
        # apply_K already carries one half of the ghost correction; the
        # implicit half moves to the right-hand side as well
        rhs_lin = 1j * psi / dt - 0.5 * apply_K(psi) - 0.5 * ghost
        new = 2.0 * psi - prev          # linear predictor seeds the relaxation
        prev = psi
        for _ in range(FIXED_POINT_MAX_ITER):
            q = discrete_gradient(np.abs(new) ** 2, b)
            ab = ab_base.copy()
            ab[2, :] += 0.5 * q
            rhs = rhs_lin - 0.5 * q * psi
            nxt = solve_banded((2, 2), ab, rhs)
            if np.max(np.abs(nxt - new)) < FIXED_POINT_TOL * scale:
                new = nxt
                break
            new = nxt
        psi = new
        psi[:n_clamp] = ref[:n_clamp]
        psi[-n_clamp:] = ref[-n_clamp:]
        edge = max(float(np.max(np.abs(psi[:2 * n_clamp] - ref[:2 * n_clamp]))),
                   float(np.max(np.abs(psi[-2 * n_clamp:] - ref[-2 * n_clamp:]))))
        boundary_drift = max(boundary_drift, edge)
        t = initial.t + (n + 1) * dt
        if (n + 1) % out_stride == 0 or n == n_steps - 1:
            record(t, psi)

    if boundary_drift > BOUNDARY_DRIFT_TOL:
        warnings.warn(f"field deviates from the reference far field by "
                      f"{boundary_drift:.2e} near the clamp; radiation reached "
                      "the boundary, diagnostics past that time are suspect",
                      RuntimeWarning)
    diags = RunDiagnostics(
        t=np.array(times), energy=np.array(energies), momentum=np.array(momenta),
        momentum_kind="untwisted" if untwisted else "grid",
        mode_amp=np.array(amps) if mode_real is not None else None,
        d_hy=np.array(dhys) if track_distances else None,
        d_Z=np.array(dzs) if track_distances else None,
        boundary_drift=boundary_drift)
    final = FieldState(psi, x, t, c)
    if keep_snapshots:
        return final, diags, snaps
    return final, diags


def fit_growth_rate(diags: RunDiagnostics, amp_floor: float,
                    amp_cap: float) -> tuple:
    """Least-squares slope of log|a(t)| on amp_floor <= |a| <= amp_cap.

    Requires at least two e-foldings inside the window; otherwise errors
    out advising a smaller seed or a longer run. Returns (rate, half_width)
    with a 95% confidence half-width on the slope.
    """
    if diags.mode_amp is None:
        raise DynamicsError("run was not tracked against a mode")
    a = np.abs(diags.mode_amp)
    mask = (a >= amp_floor) & (a <= amp_cap) & (a > 0)
    if np.count_nonzero(mask) < 5:
        raise DynamicsError("too few samples in the fit window; "
                            "decrease the seed amplitude or extend T")
    la = np.log(a[mask])
    if la.max() - la.min() < 2.0:
        raise DynamicsError("amplitude spans fewer than two e-foldings; "
                            "decrease the seed amplitude or extend T")
    tt = diags.t[mask]
    A = np.vstack([tt, np.ones_like(tt)]).T
    coef, res, *_ = np.linalg.lstsq(A, la, rcond=None)
    n = tt.size
    var = float(res[0]) / (n - 2) if res.size else 0.0
    se = math.sqrt(var / float(np.sum((tt - tt.mean()) ** 2))) if n > 2 else 0.0
    return float(coef[0]), 1.96 * se
