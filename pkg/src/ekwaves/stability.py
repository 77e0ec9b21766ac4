"""Momentum-based stability criteria and the discretized second variation.

A soliton branch parametrized by its speed is orbitally stable when the
momentum decreases with speed; the equivalent convexity of the momentum of
instability and the transonic small-amplitude law are evaluated here by
quadrature. The spectral side discretizes the second variation of the
energy at fixed momentum and checks its signature: one negative direction,
a kernel spanned by the translation mode, and a Jordan partner supplied by
the speed derivative of the wave family.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.linalg import eigvalsh

from .discretization import Grid, dx, inner_l2
from .errors import NumericalError, PreconditionError, ResolutionError
from .models import FluidModel
from .profiles import (EndState, WaveProfile, _f_factory, _soliton_F_factory,
                       first_integrals, soliton_min_density, soliton_profile)

NEGATIVE_EIG_REL_THRESHOLD = 1e-8   # eigenvalues below -threshold*max|eig|
                                    # count as genuinely negative


@dataclass(frozen=True)
class StabilityReport:
    c: float
    P: float
    dPdc: float
    m2: float               # second derivative of the momentum of instability
    verdict: str            # stable | unstable | marginal


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    n_negative: int
    kernel_residual: float
    jordan_residual: float
    grid_spacing: float


@dataclass
class DecompositionRecord:
    alpha: float
    beta: float
    W: tuple
    t: float = 0.0


# --------------------------------------------------------------------------
# momentum functionals


def _momentum_quadrature(model: FluidModel, right: EndState, c: float) -> float:
    """P by the density-variable quadrature with endpoint desingularization.

    P = 2 int_{rho_m}^{rho+} (rho-rho+)^2 (c-v+)/rho sqrt(K/2F) d rho; the
    substitution rho = rho_m + (rho+-rho_m) u^2 removes the square-root
    singularity at the minimum, and the series form of F/(rho-rho_m) is
    used next to it.
    """
    rho_m = soliton_min_density(model, right, c)
    rp, vp = right.rho, right.v
    j = rp * (vp - c)
    q = j * j / (2.0 * rp ** 2) + float(model.g(rp))
    F = _soliton_F_factory(model, right, c)
    f = _f_factory(model, j, q)
    delta = rp - rho_m

    def integrand(u):
        rho = rho_m + delta * u * u
        dens = (rho - rp) ** 2 * (c - vp) / rho
        sqrtK2 = math.sqrt(float(model.K(rho)) / 2.0)
        if rho - rho_m < 1e-8 * delta:
            # F/(rho - rho_m) ~ f(rho_m) + f'(rho_m)(rho - rho_m)/2 at the
            # simple zero; the substitution cancels the factor u exactly
            F_over = f(rho_m) + 0.5 * (f(rho) - f(rho_m))
            if F_over <= 0.0:
                return 0.0
            return 4.0 * delta * dens * sqrtK2 / math.sqrt(F_over * delta)
        Fval = F(rho)
        if Fval <= 0.0:
            return 0.0
        return 4.0 * delta * u * dens * sqrtK2 / math.sqrt(Fval)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-10,
                        limit=300)
    if err > max(1e-10, 1e-7 * abs(val)):
        raise NumericalError(f"momentum quadrature error {err:.2e} too large")
    return float(val)


def momentum_of_profile(model: FluidModel, profile: WaveProfile) -> float:
    """Momentum of a soliton profile, cross-checked two ways.

    The grid value (trapezoid of (rho-rho+)(v-v+)) is returned; it must
    agree with the independent density-variable quadrature to 1e-6
    relative, otherwise the profile is under-resolved.
    """
    right = profile.spec.right
    integrand = (profile.rho - right.rho) * (profile.v - right.v)
    P_grid = float(np.trapezoid(integrand, profile.xi))
    if right.rho - profile.rho_min <= 1e-12 * right.rho:
        return P_grid
    P_quad = _momentum_quadrature(model, right, profile.spec.c)
    tol = 1e-6 * max(abs(P_quad), 1e-12)
    if abs(P_grid - P_quad) > tol:
        raise ResolutionError(
            f"momentum mismatch: grid {P_grid:.12g} vs quadrature "
            f"{P_quad:.12g} (profile under-resolved)")
    return P_grid


def dPdc(model: FluidModel, right: EndState, c: float, h_c: float = 1e-3) -> float:
    """Richardson-refined central difference of P along the soliton branch."""
    def P(cc):
        return _momentum_quadrature(model, right, cc)
    d_h = (P(c + h_c) - P(c - h_c)) / (2.0 * h_c)
    d_h2 = (P(c + 0.5 * h_c) - P(c - 0.5 * h_c)) / h_c
    return float((4.0 * d_h2 - d_h) / 3.0)


def stability_report(model: FluidModel, right: EndState, c: float,
                     h_c: float = 1e-3) -> StabilityReport:
    P = _momentum_quadrature(model, right, c)
    d = dPdc(model, right, c, h_c)
    if d < -1e-8:
        verdict = "stable"
    elif d > 1e-8:
        verdict = "unstable"
    else:
        verdict = "marginal"
    return StabilityReport(c=c, P=P, dPdc=d, m2=-d, verdict=verdict)


@dataclass
class TransonicScan:
    eps: np.ndarray
    c: np.ndarray
    delta: np.ndarray        # amplitude rho+ - rho_m
    P: np.ndarray
    dPddelta: np.ndarray
    slope: float             # log P vs log delta least-squares slope
    dP_positive: bool
    hypothesis_ok: bool      # g''(rho+) >= 0 as the small-amplitude law assumes


def transonic_stability_scan(model: FluidModel, right: EndState,
                             eps_list) -> TransonicScan:
    """Tabulate P against amplitude on the near-sonic soliton family.

    The small-amplitude law P ~ delta^(3/2) is checked through the log-log
    slope; dP/d delta > 0 along the scan is the stability statement in the
    amplitude variable.
    """
    eps = np.sort(np.atleast_1d(np.asarray(eps_list, dtype=float)))[::-1]
    rp = right.rho
    css = rp * float(model.g1(rp))
    if css <= 0.0:
        raise PreconditionError("endstate has non-positive sound speed")
    cs, deltas, Ps = [], [], []
    for e in eps:
        c = right.v + math.sqrt(css * (1.0 - e))
        rho_m = soliton_min_density(model, right, c)
        cs.append(c)
        deltas.append(rp - rho_m)
        Ps.append(_momentum_quadrature(model, right, c))
    cs = np.array(cs)
    deltas = np.array(deltas)
    Ps = np.array(Ps)
    if len(Ps) >= 3:
        dPdd = np.gradient(Ps, deltas, edge_order=2)
    else:
        dPdd = np.full_like(Ps, (Ps[-1] - Ps[0]) / (deltas[-1] - deltas[0]))
    slope = float(np.polyfit(np.log(deltas), np.log(np.abs(Ps)), 1)[0])
    return TransonicScan(eps=eps, c=cs, delta=deltas, P=Ps, dPddelta=dPdd,
                         slope=slope, dP_positive=bool(np.all(dPdd > 0.0)),
                         hypothesis_ok=bool(model.g2(rp) >= 0.0))


def momentum_of_instability(model: FluidModel, profile: WaveProfile) -> float:
    """m(c) = H - c P - lambda1 P1 - lambda2 P2 for a soliton profile."""
    right = profile.spec.right
    rp, vp = right.rho, right.v
    xi, rho, v = profile.xi, profile.rho, profile.v
    h = xi[1] - xi[0]
    from . import kernels
    drho = kernels.diff1(rho, h, order=4, periodic=False)
    Hval = float(np.trapezoid(
        0.5 * (rho * v * v - rp * vp * vp)
        + 0.5 * model.K(rho) * drho * drho
        + model.Gfun(rho) - model.Gfun(rp), xi))
    P = float(np.trapezoid((rho - rp) * (v - vp), xi))
    P1 = float(np.trapezoid(rho - rp, xi))
    P2 = float(np.trapezoid(v - vp, xi))
    lam1 = 0.5 * vp * vp + float(model.g(rp))
    lam2 = rp * vp
    return Hval - profile.spec.c * P - lam1 * P1 - lam2 * P2


# --------------------------------------------------------------------------
# discretized second variation


def _resample(profile: WaveProfile, grid: Grid):
    rho, _ = profile(grid.x)
    v = profile.spec.c + profile.spec.j / rho
    return rho, v


def assemble_d2E(model: FluidModel, profile: WaveProfile, grid: Grid) -> np.ndarray:
    """Dense symmetric matrix of the second variation of H - cP.

    Second-order stencils: the capillary block uses the compact midpoint-K
    form, the local coefficient uses centered differences of the sampled
    density, the off-diagonal blocks are the diagonal (v - c). On a clamped
    grid the boundary nodes carry homogeneous Dirichlet conditions and are
    eliminated; the matrix then acts on interior nodes only.
    """
    rho, v = _resample(profile, grid)
    h = grid.h
    c = profile.spec.c
    periodic = grid.periodic

    drho = dx(rho, grid, order=2)
    if periodic:
        d2rho = (np.roll(rho, -1) - 2.0 * rho + np.roll(rho, 1)) / (h * h)
        rho_mid_r = 0.5 * (rho + np.roll(rho, -1))   # density at i+1/2
    else:
        d2rho = np.empty_like(rho)
        d2rho[1:-1] = (rho[2:] - 2.0 * rho[1:-1] + rho[:-2]) / (h * h)
        d2rho[0] = (2.0 * rho[0] - 5.0 * rho[1] + 4.0 * rho[2] - rho[3]) / (h * h)
        d2rho[-1] = (2.0 * rho[-1] - 5.0 * rho[-2] + 4.0 * rho[-3]
                     - rho[-4]) / (h * h)
        rho_mid_r = 0.5 * (rho[:-1] + rho[1:])

    W = (-model.K1(rho) * d2rho - 0.5 * model.K2(rho) * drho * drho
         + model.g1(rho))
    K_mid = model.K(rho_mid_r)

    if periodic:
        m = grid.n
        idx = np.arange(m)
        A = np.zeros((m, m))
        Kp = K_mid
        Km = np.roll(K_mid, 1)
        A[idx, idx] = (Kp + Km) / (h * h) + W
        A[idx, (idx + 1) % m] = -Kp / (h * h)
        A[idx, (idx - 1) % m] = -Km / (h * h)
        offdiag = v - c
        rho_block = rho
    else:
        m = grid.n - 2
        idx = np.arange(m)
        A = np.zeros((m, m))
        Kp = K_mid[1:]       # K at (i+1/2) for interior node i = 1..n-2
        Km = K_mid[:-1]      # K at (i-1/2)
        A[idx, idx] = (Kp + Km) / (h * h) + W[1:-1]
        A[idx[:-1], idx[:-1] + 1] = -Kp[:-1] / (h * h)
        A[idx[1:], idx[1:] - 1] = -Km[1:] / (h * h)
        offdiag = (v - c)[1:-1]
        rho_block = rho[1:-1]

    M = np.zeros((2 * m, 2 * m))
    M[:m, :m] = A
    M[idx, m + idx] = offdiag
    M[m + idx, idx] = offdiag
    M[m + idx, m + idx] = rho_block
    return M


def _interior(arr, grid: Grid):
    return arr if grid.periodic else arr[1:-1]


def kernel_direction(profile: WaveProfile, grid: Grid, order: int = 2):
    """Translation mode d/dx U on the grid, by profile differentiation."""
    rho, v = _resample(profile, grid)
    dr = dx(rho, grid, order)
    du = dx(v, grid, order)
    return _interior(dr, grid), _interior(du, grid)


def spectrum_d2E(matrix: np.ndarray, profile: WaveProfile, model: FluidModel,
                 grid: Grid, h_c: float = 1e-3) -> SpectralReport:
    """Eigen-structure and the kernel/Jordan residuals of the discrete d2E.

    The negative count uses the relative threshold -1e-8 max|eig| to keep
    the near-zero translation eigenvalue out of the count once it is below
    that scale. The Jordan residual compares d2E applied to the c-derivative
    of the wave family (profiles re-centered at their density minimum)
    against minus J applied to the wave, and is only defined for solitons.
    """
    ev = eigvalsh(matrix)
    max_abs = max(abs(ev[0]), abs(ev[-1]))
    threshold = -NEGATIVE_EIG_REL_THRESHOLD * max_abs
    n_negative = int(np.sum(ev < threshold))

    kr, ku = kernel_direction(profile, grid, order=2)
    phi = np.concatenate([kr, ku])
    kernel_residual = float(np.linalg.norm(matrix @ phi)
                            / np.linalg.norm(phi))

    jordan_residual = math.nan
    if profile.spec.kind == "soliton":
        right = profile.spec.right
        half_width = float(profile.xi[-1])
        n = len(profile.xi)
        prof_p = soliton_profile(model, right, profile.spec.c + h_c,
                                 half_width, n)
        prof_m = soliton_profile(model, right, profile.spec.c - h_c,
                                 half_width, n)
        rho_p, v_p = _resample(prof_p, grid)
        rho_m_, v_m = _resample(prof_m, grid)
        dcr = (rho_p - rho_m_) / (2.0 * h_c)
        dcu = (v_p - v_m) / (2.0 * h_c)
        rho0, v0 = _resample(profile, grid)
        r0 = rho0 - right.rho
        u0 = v0 - right.v
        dc = np.concatenate([_interior(dcr, grid), _interior(dcu, grid)])
        # J U = (-u, -r)
        JU = np.concatenate([-_interior(u0, grid), -_interior(r0, grid)])
        res = matrix @ dc + JU
        jordan_residual = float(math.sqrt(grid.h * np.sum(res * res)))

    return SpectralReport(eigenvalues=ev, n_negative=n_negative,
                          kernel_residual=kernel_residual,
                          jordan_residual=jordan_residual,
                          grid_spacing=grid.h)


def decompose(U, profile: WaveProfile, grid: Grid, center: float = 0.0,
              t: float = 0.0, order: int = 2,
              kink_mode: bool = False) -> DecompositionRecord:
    """Split U against the momentum-gradient and translation directions.

    Solves the 2x2 Gram system for the projection of U = (r, u) onto
    span{-J U_wave, d/dx V_wave} in the discrete L2 pairing; the remainder
    W is orthogonal to both. The translation direction comes from grid
    differentiation of the resampled wave. For a kink (kink_mode) only the
    translation direction is used and alpha = 0 by convention.
    """
    r, u = U
    x = grid.x - center
    rho_w, v_w = profile(x)
    right = profile.spec.right
    b2r = dx(rho_w, grid, order)
    b2u = dx(v_w, grid, order)
    if kink_mode:
        nb2 = inner_l2(grid, b2r, b2u, b2r, b2u)
        if nb2 < 1e-30:
            raise PreconditionError("degenerate translation direction")
        beta = inner_l2(grid, r, u, b2r, b2u) / nb2
        return DecompositionRecord(alpha=0.0, beta=float(beta),
                                   W=(r - beta * b2r, u - beta * b2u), t=t)
    b1r = v_w - right.v          # -J U = (u, r) swaps the components
    b1u = rho_w - right.rho
    g11 = inner_l2(grid, b1r, b1u, b1r, b1u)
    g22 = inner_l2(grid, b2r, b2u, b2r, b2u)
    g12 = inner_l2(grid, b1r, b1u, b2r, b2u)
    gram = np.array([[g11, g12], [g12, g22]])
    if g11 < 1e-30 or g22 < 1e-30:
        raise PreconditionError("degenerate projection directions "
                                "(zero-amplitude wave)")
    rhs = np.array([inner_l2(grid, r, u, b1r, b1u),
                    inner_l2(grid, r, u, b2r, b2u)])
    alpha, beta = np.linalg.solve(gram, rhs)
    W = (r - alpha * b1r - beta * b2r, u - alpha * b1u - beta * b2u)
    return DecompositionRecord(alpha=float(alpha), beta=float(beta), W=W, t=t)
