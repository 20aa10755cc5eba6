"""Linearized operators around a non-vanishing wave, and their spectra.

In the hydrodynamical variables (zeta, upsilon) the linearization in the
co-moving frame reads lambda (zeta, upsilon)^T = J L (zeta, upsilon)^T with

    J = -d_x [[0, 1], [1, 0]],
    L = [[ M, 2 u* - c* ], [ 2 u* - c*, 2 (r0^2 + eta*) ]],
    M = -f'(r0^2+eta*) - (1/(2 A*)) d_xx (. / A*) + d_xx(A*)/(2 A*^3),

and the reduced Sturm-Liouville comparison operator is
M^dag = M - (c* - 2 u*)^2 / (2 (r0^2 + eta*)), with M^dag d_x eta* = 0 and
essential spectrum starting at (c_s^2 - c*^2)/(2 r0^2). The reported
continuum edge is scaled by 2 r0^2 so that it estimates c_s^2 - c*^2.

Matrices are dense; boundary rows are plain Dirichlet truncations, which
keeps M, L symmetric and J skew-symmetric exactly, and the resampled
profile tails already sit in the constant-coefficient far-field regime.
M uses the 6th-order second-difference stencil so that the discretized
translational zero modes of M^dag and L land well above the -1e-8
negative-count threshold; J keeps the 4th-order first derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .profile import WaveProfile

# eigenvalues below this count as negative
NEG_EIG_TOL = -1e-8
# spurious-mode filter
MODE_RESIDUAL_TOL = 1e-8
MODE_MASS_FRACTION = 0.99
MODE_MASS_RADIUS = 0.8          # fraction of L
TRANSLATION_OVERLAP = 0.999
# fraction of an eigenvector's mass that must sit inside MODE_MASS_RADIUS
# for it to count as localized when estimating the continuum edge
EDGE_MASS_FRACTION = 0.99


class SpectrumError(ValueError):
    pass


@dataclass
class LinearizedOperators:
    x: np.ndarray
    h: float
    L_half: float
    N: int
    c: float
    model: object
    eta: np.ndarray
    u: np.ndarray
    M: np.ndarray
    Mdag: np.ndarray
    Lmat: np.ndarray           # 2N x 2N symmetric block operator
    J: np.ndarray              # 2N x 2N skew-symmetric


@dataclass
class SpectrumReport:
    gamma0: Optional[float]
    mode: Optional[tuple]              # (zeta, upsilon) normalized
    n_neg_L: int
    n_neg_Mdag: int
    continuum_edge: float              # estimates c_s^2 - c*^2
    residuals: dict
    N: int


def _stencil_matrix(n: int, h: float, offs_coeffs: dict, power: int) -> np.ndarray:
    out = np.zeros((n, n))
    for off, cf in offs_coeffs.items():
        out += np.diag(np.full(n - abs(off), cf), off)
    return out / h ** power


_D2_STENCIL = {-3: 1 / 90, -2: -3 / 20, -1: 3 / 2, 0: -49 / 18,
               1: 3 / 2, 2: -3 / 20, 3: 1 / 90}


def _second_derivative(n, h):
    # 6th-order centered; Dirichlet truncation keeps it symmetric
    return _stencil_matrix(n, h, _D2_STENCIL, 2)


def _second_derivative_of_field(y: np.ndarray, h: float) -> np.ndarray:
    """d_xx of a coefficient field whose far field is constant.

    Ghost cells take the boundary values, so profiles that have settled to
    the background get exact (zero) curvature at the edge rows instead of
    the O(1/h^2) garbage of a plain truncation.
    """
    pad = np.concatenate([np.full(3, y[0]), y, np.full(3, y[-1])])
    out = np.zeros_like(y)
    for off, cf in _D2_STENCIL.items():
        out += cf * pad[3 + off: 3 + off + y.size]
    return out / (h * h)


def _first_derivative(n, h):
    # 4th-order centered; antisymmetric Toeplitz, so skewness is exact
    return _stencil_matrix(n, h, {-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12}, 1)


def _first_derivative6(n, h):
    # used only to build reference vectors (translation mode); matching the
    # 6th-order accuracy of M keeps kernel residuals at the h^6 level
    return _stencil_matrix(n, h, {-3: -1 / 60, -2: 3 / 20, -1: -3 / 4,
                                  1: 3 / 4, 2: -3 / 20, 3: 1 / 60}, 1)


def build_operators(profile: WaveProfile, N: int) -> LinearizedOperators:
    """Assemble the dense linearized operators on an N-point grid.

    The profile is resampled through its analytic evaluators, so the grid
    need not match the profile's. Kinks are rejected: the hydrodynamical
    variables are undefined where the wave vanishes.
    """
    if profile.is_kink:
        raise SpectrumError("kink profile: hydrodynamical linearization "
                            "is invalid where the wave vanishes")
    if N < 512:
        raise SpectrumError("N must be at least 512")
    model = profile.model
    Lh = profile.L
    x = np.linspace(-Lh, Lh, N)
    h = x[1] - x[0]
    eta = profile.eta_of(x)
    u = profile.u_of(x)
    rho = model.r02 + eta
    A = np.sqrt(rho)
    c = profile.c

    D2 = _second_derivative(N, h)
    D1 = _first_derivative(N, h)

    d2A = _second_derivative_of_field(A, h)
    M = np.diag(-model.df(rho) + d2A / (2.0 * rho ** 1.5)) \
        - np.diag(1.0 / (2.0 * A)) @ D2 @ np.diag(1.0 / A)
    M = 0.5 * (M + M.T)
    Mdag = M - np.diag((c - 2.0 * u) ** 2 / (2.0 * rho))

    off = np.diag(2.0 * u - c)
    Lmat = np.block([[M, off], [off, np.diag(2.0 * rho)]])
    Z = np.zeros((N, N))
    J = np.block([[Z, -D1], [-D1, Z]])
    return LinearizedOperators(x=x, h=h, L_half=Lh, N=N, c=c, model=model,
                               eta=eta, u=u, M=M, Mdag=Mdag, Lmat=Lmat, J=J)


def count_negative(ops: LinearizedOperators) -> dict:
    """Counts of eigenvalues below -1e-8 for the symmetric operators."""
    ev_L = np.linalg.eigvalsh(ops.Lmat)
    ev_M = np.linalg.eigvalsh(ops.Mdag)
    return {"n_neg_L": int(np.sum(ev_L < NEG_EIG_TOL)),
            "n_neg_Mdag": int(np.sum(ev_M < NEG_EIG_TOL))}


def continuum_edge(ops: LinearizedOperators) -> float:
    """Lowest non-localized band of M^dag, scaled to estimate c_s^2 - c*^2."""
    evals, evecs = np.linalg.eigh(ops.Mdag)
    inside = np.abs(ops.x) <= MODE_MASS_RADIUS * ops.L_half
    for i in range(min(len(evals), 64)):
        v = evecs[:, i]
        if np.sum(v[inside] ** 2) < EDGE_MASS_FRACTION * np.sum(v ** 2):
            return 2.0 * ops.model.r02 * float(evals[i])
    raise SpectrumError("no extended state among the lowest eigenvectors; "
                        "increase the domain")


def _translation_mode(ops: LinearizedOperators) -> np.ndarray:
    D1 = _first_derivative6(ops.N, ops.h)
    v = np.concatenate([D1 @ ops.eta, D1 @ ops.u])
    return v / np.linalg.norm(v)


def find_unstable_mode(ops: LinearizedOperators):
    """The unique real unstable eigenvalue of J L, or None at stable points.

    Candidates with Re > 1e-6 c_s/r0 pass three filters: residual below
    1e-8, at least 99% of their mass inside |x| <= 0.8 L, and squared
    overlap below 0.999 with the discrete translation mode d_x(eta*, u*)
    (the kernel direction of L, whose discretization otherwise shows up at
    an O(h^6) positive value). More than one survivor means the grid is
    too coarse to trust, and raises.
    """
    JL = ops.J @ ops.Lmat
    evals, evecs = np.linalg.eig(JL)
    threshold = 1e-6 * ops.model.c_s / ops.model.r0
    inside = np.abs(ops.x) <= MODE_MASS_RADIUS * ops.L_half
    mask2 = np.concatenate([inside, inside])
    t_mode = _translation_mode(ops)

    survivors = []
    for i in np.nonzero(evals.real > threshold)[0]:
        lam = evals[i]
        v = evecs[:, i]
        resid = np.linalg.norm(JL @ v - lam * v) / np.linalg.norm(v)
        if resid > MODE_RESIDUAL_TOL:
            continue
        mass = np.sum(np.abs(v[mask2]) ** 2) / np.sum(np.abs(v) ** 2)
        if mass < MODE_MASS_FRACTION:
            continue
        overlap = abs(np.vdot(t_mode, v)) ** 2 / np.vdot(v, v).real
        if overlap > TRANSLATION_OVERLAP:
            continue
        survivors.append((lam, v, resid))

    if not survivors:
        return None
    # conjugate pairs count once
    distinct = []
    for lam, v, resid in survivors:
        if not any(abs(lam - np.conj(l2)) < 1e-10 * max(1.0, abs(lam))
                   and abs(lam.imag) > 0 for l2, _, _ in distinct):
            distinct.append((lam, v, resid))
    if len(distinct) > 1:
        vals = ", ".join(f"{l:.6g}" for l, _, _ in distinct)
        raise SpectrumError("multiple unstable candidates survive filtering "
                            f"({vals}); refine the grid")
    lam, v, resid = distinct[0]
    if abs(lam.imag) > 1e-10 * max(1.0, abs(lam.real)):
        raise SpectrumError(f"unstable eigenvalue {lam:.6g} is not real; "
                            "refine the grid")
    v = v.real
    v /= np.linalg.norm(v)
    zeta, ups = v[:ops.N], v[ops.N:]
    return {"gamma0": float(lam.real), "zeta": zeta, "upsilon": ups,
            "residual": float(resid)}


def mode_to_field(profile: WaveProfile, ops: LinearizedOperators,
                  zeta: np.ndarray, upsilon: np.ndarray) -> np.ndarray:
    """Map a hydrodynamical mode to the wavefunction perturbation

        w = U_* (zeta/(2 (r0^2 + eta_*)) + i int_{-inf}^x upsilon),

    normalized so that the grid L2 norm of Re w is 1 (the seeding
    convention of the instability tracking). zeta perturbs the squared
    modulus, so the amplitude factor carries the local 1/(2 A_*^2), not a
    bare 1/2; the two agree only in the far field. Requires int upsilon
    = 0, which holds for genuine modes; a violation flags a discretization
    artifact.
    """
    h = ops.h
    total = float(np.sum(upsilon)) * h
    if abs(total) > 1e-6 * max(1.0, float(np.sum(np.abs(upsilon))) * h):
        raise SpectrumError(f"mode has nonzero mean upsilon ({total:.3e}); "
                            "discretization artifact")
    # spline antiderivative: trapezoid accumulation is only 2nd order and
    # leaks O(h^2) of non-mode content into the seeded field
    from scipy.interpolate import CubicSpline
    Iu = CubicSpline(ops.x, upsilon).antiderivative()(ops.x)
    U = profile.field_of(ops.x)
    rho = ops.model.r02 + ops.eta
    w = U * (zeta / (2.0 * rho) + 1j * Iu)
    nrm = math.sqrt(h * float(np.sum(w.real ** 2)))
    if nrm == 0.0:
        return w
    return w / nrm


def spectrum_report(profile: WaveProfile, N: int) -> SpectrumReport:
    """Full spectral diagnostics at one branch point."""
    ops = build_operators(profile, N)
    counts = count_negative(ops)
    edge = continuum_edge(ops)
    found = find_unstable_mode(ops)
    residuals = {}
    if found is not None:
        residuals["eigen"] = found["residual"]
        mode = (found["zeta"], found["upsilon"])
        gamma0 = found["gamma0"]
    else:
        mode, gamma0 = None, None
    t = _translation_mode(ops)
    residuals["translation_zero_mode"] = float(
        np.linalg.norm(ops.J @ (ops.Lmat @ t)))
    return SpectrumReport(gamma0=gamma0, mode=mode, n_neg_L=counts["n_neg_L"],
                          n_neg_Mdag=counts["n_neg_Mdag"], continuum_edge=edge,
                          residuals=residuals, N=N)
