"""Grids, discrete functionals and the method-of-lines time steppers.

The semidiscretization is deliberately structured: the nonlinear right-hand
side is J D applied to the exact gradient of the discrete energy, with D a
centered (hence skew-symmetric on periodic grids) difference operator. The
semidiscrete flow then conserves the discrete energy exactly and the time
integration error of RK4 is the only drift source. A gauge formulation
evolving z = v + i*sqrt(K/rho) d rho/dx is provided as an independent
cross-check of the primitive scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import kernels
from .errors import BlowupError, ConfigError, StateError
from .models import FluidModel
from .profiles import EndState


# --------------------------------------------------------------------------
# grids and states


@dataclass(frozen=True)
class Grid:
    """Uniform 1-D grid, periodic or clamped to prescribed endstates."""

    n: int
    h: float
    x0: float
    boundary: str = "periodic"
    left: EndState | None = None
    right: EndState | None = None

    def __post_init__(self):
        if self.n < 16:
            raise ConfigError("grid needs at least 16 points", field="n")
        if self.h <= 0:
            raise ConfigError("grid spacing must be positive", field="h")
        if self.boundary not in ("periodic", "clamped"):
            raise ConfigError(f"unknown boundary '{self.boundary}'", field="boundary")
        if self.boundary == "clamped" and (self.left is None or self.right is None):
            raise ConfigError("clamped grid needs left/right endstates",
                              field="boundary")

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    @property
    def width(self) -> float:
        return self.h * (self.n if self.periodic else self.n - 1)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights."""
        w = np.full(self.n, self.h)
        if not self.periodic:
            w[0] = w[-1] = 0.5 * self.h
        return w

    @staticmethod
    def periodic_grid(x0: float, width: float, n: int) -> "Grid":
        return Grid(n=n, h=width / n, x0=x0)

    @staticmethod
    def clamped_grid(x0: float, width: float, n: int,
                     left: EndState, right: EndState) -> "Grid":
        return Grid(n=n, h=width / (n - 1), x0=x0, boundary="clamped",
                    left=left, right=right)


@dataclass
class FieldState:
    """Primitive fields (rho, v) at time t."""

    rho: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def copy(self) -> "FieldState":
        return FieldState(self.rho.copy(), self.v.copy(), self.t)


@dataclass
class GaugeState:
    """Gauge fields: z = v + i*w with w = sqrt(K/rho) d rho/dx, a = sqrt(rho K)."""

    rho: np.ndarray
    w: np.ndarray
    z_re: np.ndarray
    z_im: np.ndarray
    a: np.ndarray
    t: float = 0.0


def validate_state(state: FieldState, grid: Grid, endstate_tol: float = 1e-8) -> None:
    """Vacuum/NaN guard plus clamped-boundary consistency."""
    if state.rho.shape != (grid.n,) or state.v.shape != (grid.n,):
        raise StateError("field shape does not match grid")
    if not (np.all(np.isfinite(state.rho)) and np.all(np.isfinite(state.v))):
        raise StateError("non-finite field values")
    if np.any(state.rho <= 0.0):
        raise StateError("vacuum: non-positive density")
    if not grid.periodic:
        for idx, end in ((0, grid.left), (-1, grid.right)):
            if (abs(state.rho[idx] - end.rho) > endstate_tol
                    or abs(state.v[idx] - end.v) > endstate_tol):
                raise StateError("clamped boundary values do not match the "
                                 "declared endstates")


def gauge_state(model: FluidModel, state: FieldState, grid: Grid,
                order: int = 4) -> GaugeState:
    """Build the gauge variables from a primitive state."""
    rho = state.rho
    drho = dx(rho, grid, order)
    w = np.sqrt(model.K(rho) / rho) * drho
    a = np.sqrt(rho * model.K(rho))
    return GaugeState(rho=rho.copy(), w=w, z_re=state.v.copy(), z_im=w.copy(),
                      a=a, t=state.t)


# --------------------------------------------------------------------------
# discrete calculus and functionals


def dx(field: np.ndarray, grid: Grid, order: int = 2) -> np.ndarray:
    """First derivative; centered interior, one-sided at clamped boundaries."""
    if order not in (2, 4):
        raise ConfigError(f"stencil order must be 2 or 4, got {order}",
                          field="order")
    if grid.n < order + 1:
        raise ConfigError("grid too small for the stencil", field="n")
    return kernels.diff1(np.asarray(field, dtype=np.float64), grid.h, order,
                         grid.periodic)


def inner_l2(grid: Grid, a1, a2, b1, b2) -> float:
    """Discrete L2 pairing of two (r, u) pairs."""
    w = grid.weights
    return float(np.sum(w * (a1 * b1 + a2 * b2)))


def norm_l2(grid: Grid, f) -> float:
    return float(np.sqrt(np.sum(grid.weights * np.asarray(f) ** 2)))


def norm_h0(grid: Grid, r, u, order: int = 4) -> float:
    """Discrete version of the energy-space norm: H1 on r plus L2 on u."""
    dr = dx(r, grid, order)
    w = grid.weights
    nr = np.sqrt(np.sum(w * (r * r + dr * dr)))
    nu = np.sqrt(np.sum(w * (u * u)))
    return float(nr + nu)


def discrete_H(model: FluidModel, state: FieldState, grid: Grid,
               endstate: EndState, order: int = 4) -> float:
    """Renormalized total energy on the grid.

    The integrand is anchored so it vanishes at the declared endstate; when
    the grid is clamped between two different endstates the first-order
    counterterms (the multipliers of the mass and velocity integrals) are
    subtracted as well, so the sum converges as the domain grows.
    """
    validate_state(state, grid)
    rho, v = state.rho, state.v
    drho = dx(rho, grid, order)
    rp, vp = endstate.rho, endstate.v
    integrand = (0.5 * (rho * v * v - rp * vp * vp)
                 + 0.5 * model.K(rho) * drho * drho
                 + model.Gfun(rho) - model.Gfun(rp))
    if not grid.periodic and grid.left is not None and (
            grid.left.rho != grid.right.rho or grid.left.v != grid.right.v):
        lam1 = 0.5 * vp * vp + model.g(rp)
        lam2 = rp * vp
        integrand = integrand - lam1 * (rho - rp) - lam2 * (v - vp)
    return float(np.sum(grid.weights * integrand))


def discrete_P(state: FieldState, endstate: EndState, grid: Grid) -> float:
    """Rescaled momentum relative to the endstate."""
    validate_state(state, grid)
    integrand = (state.rho - endstate.rho) * (state.v - endstate.v)
    return float(np.sum(grid.weights * integrand))


def delta_H(model: FluidModel, state: FieldState, grid: Grid,
            order: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """First variation of the energy, in its discrete-gradient form.

    Returns the pair (variation in rho, variation in v). The capillary part
    is written as -D(K D rho) + K'(D rho)^2/2, which is simultaneously a
    centered discretization of the continuum expression and the exact
    gradient of the discrete energy used by discrete_H.
    """
    validate_state(state, grid)
    rho, v = state.rho, state.v
    dr = dx(rho, grid, order)
    dHr = (0.5 * v * v + model.g(rho) + 0.5 * model.K1(rho) * dr * dr
           - dx(model.K(rho) * dr, grid, order))
    dHu = rho * v
    return dHr, dHu


def _lin_coeffs(model: FluidModel, rho: np.ndarray, grid: Grid, order: int):
    dr = dx(rho, grid, order)
    w0 = model.g1(rho) + 0.5 * model.K2(rho) * dr * dr
    w1 = model.K1(rho) * dr
    return w0, w1, model.K(rho)


def apply_d2H(model: FluidModel, state: FieldState, U, grid: Grid,
              order: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Action of the second energy variation at `state` on U = (r, u).

    Exact Jacobian of delta_H, hence symmetric in the discrete L2 pairing
    on periodic grids.
    """
    validate_state(state, grid)
    r, u = U
    w0, w1, K = _lin_coeffs(model, state.rho, grid, order)
    return kernels.apply_d2h(w0, w1, K, state.v, state.rho,
                             np.asarray(r, dtype=np.float64),
                             np.asarray(u, dtype=np.float64),
                             grid.h, order, grid.periodic)


# --------------------------------------------------------------------------
# time stepping


def cfl_dt(model: FluidModel, state: FieldState, grid: Grid,
           safety: float = 0.25) -> float:
    """Dispersive CFL step: safety * h^2 / max(sqrt(rho*K))."""
    a = np.sqrt(state.rho * model.K(state.rho))
    return float(safety * grid.h * grid.h / np.max(a))


def _n_pinned(grid: Grid, order: int) -> int:
    """Number of Dirichlet-pinned nodes per side on clamped grids."""
    return 0 if grid.periodic else (2 if order == 4 else 1)


def _pin(arrs, grid: Grid, order: int) -> None:
    nb = _n_pinned(grid, order)
    if nb:
        for a in arrs:
            a[:nb] = 0.0
            a[-nb:] = 0.0


def _rhs_primitive(model, rho, v, grid, order):
    out_r, out_v = kernels.ek_rhs(rho, v, model.g(rho), model.K(rho),
                                  model.K1(rho), grid.h, order, grid.periodic)
    _pin((out_r, out_v), grid, order)
    return out_r, out_v


def step_nonlinear(model: FluidModel, state: FieldState, grid: Grid, dt: float,
                   scheme: str = "rk4_primitive", order: int = 4) -> FieldState:
    """One explicit RK4 step of the capillary Euler system.

    rk4_primitive advances (rho, v) in conservative form; rk4_gauge advances
    (rho, z) through the gauge equation and recovers v = Re z. Both track
    the same solution to the scheme's order.
    """
    if scheme == "rk4_primitive":
        rho, v = state.rho, state.v
        k1r, k1v = _rhs_primitive(model, rho, v, grid, order)
        k2r, k2v = _rhs_primitive(model, rho + 0.5 * dt * k1r,
                                  v + 0.5 * dt * k1v, grid, order)
        k3r, k3v = _rhs_primitive(model, rho + 0.5 * dt * k2r,
                                  v + 0.5 * dt * k2v, grid, order)
        k4r, k4v = _rhs_primitive(model, rho + dt * k3r, v + dt * k3v,
                                  grid, order)
        new = FieldState(
            rho + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
            v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
            state.t + dt)
    elif scheme == "rk4_gauge":
        gs = gauge_state(model, state, grid, order)

        def rhs(rho, zre, zim):
            a = np.sqrt(rho * model.K(rho))
            dr, dre, dim = kernels.gauge_rhs(rho, zre, zim, model.g1(rho), a,
                                             grid.h, order, grid.periodic)
            _pin((dr, dre, dim), grid, order)
            return dr, dre, dim

        y = (gs.rho, gs.z_re, gs.z_im)
        k1 = rhs(*y)
        k2 = rhs(*(yi + 0.5 * dt * ki for yi, ki in zip(y, k1)))
        k3 = rhs(*(yi + 0.5 * dt * ki for yi, ki in zip(y, k2)))
        k4 = rhs(*(yi + dt * ki for yi, ki in zip(y, k3)))
        rho_new, zre_new, _ = (yi + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
                               for yi, a, b, c, d in zip(y, k1, k2, k3, k4))
        new = FieldState(rho_new, zre_new, state.t + dt)
    else:
        raise ConfigError(f"unknown scheme '{scheme}'", field="scheme")

    if (not np.all(np.isfinite(new.rho)) or not np.all(np.isfinite(new.v))
            or np.any(new.rho <= 0.0)):
        raise BlowupError("time step produced vacuum or NaN", t=new.t)
    return new


class LinearizedOperator:
    """J d/dx d2H[background] + cshift * d/dx, with cached coefficients.

    The co-moving form of the linearization around a traveling wave is
    obtained with cshift = c (equivalent to subtracting c times the second
    momentum variation); the lab-frame form uses cshift = 0.
    """

    def __init__(self, model: FluidModel, grid: Grid, cshift: float = 0.0,
                 order: int = 4):
        self.model = model
        self.grid = grid
        self.cshift = cshift
        self.order = order

    def coeffs(self, state: FieldState):
        # cached on the state object: repeated RK4 stage evaluations of the
        # same background (frozen profiles, memoized providers) pay once
        key = (id(self.model), self.order)
        cached = state.__dict__.get("_lin_coeffs")
        if cached is None or cached[0] != key:
            w0, w1, K = _lin_coeffs(self.model, state.rho, self.grid, self.order)
            cached = (key, (w0, w1, K, state.v, state.rho))
            state.__dict__["_lin_coeffs"] = cached
        return cached[1]

    def rhs(self, state: FieldState, r: np.ndarray, u: np.ndarray):
        w0, w1, K, v, rho = self.coeffs(state)
        out_r, out_u = kernels.lin_rhs(w0, w1, K, v, rho, self.cshift, r, u,
                                       self.grid.h, self.order,
                                       self.grid.periodic)
        _pin((out_r, out_u), self.grid, self.order)
        return out_r, out_u


def step_linearized(model: FluidModel, background: Callable[[float], FieldState],
                    U, t: float, dt: float, grid: Grid, cshift: float = 0.0,
                    order: int = 4, forcing=None,
                    operator: LinearizedOperator | None = None):
    """One RK4 step of the linearized flow around a time-indexed background.

    `background(t)` must be evaluable at the RK4 stage times; `forcing(t)`,
    if given, returns an (r, u) pair added to the right-hand side. Returns
    the updated pair (r, u).
    """
    op = operator if operator is not None else LinearizedOperator(
        model, grid, cshift, order)
    r, u = U

    def f(ts, rr, uu):
        out_r, out_u = op.rhs(background(ts), rr, uu)
        if forcing is not None:
            fr, fu = forcing(ts)
            out_r = out_r + fr
            out_u = out_u + fu
            _pin((out_r, out_u), grid, order)
        return out_r, out_u

    k1r, k1u = f(t, r, u)
    k2r, k2u = f(t + 0.5 * dt, r + 0.5 * dt * k1r, u + 0.5 * dt * k1u)
    k3r, k3u = f(t + 0.5 * dt, r + 0.5 * dt * k2r, u + 0.5 * dt * k2u)
    k4r, k4u = f(t + dt, r + dt * k3r, u + dt * k3u)
    rn = r + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    un = u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    if not (np.all(np.isfinite(rn)) and np.all(np.isfinite(un))):
        raise BlowupError("linearized step produced NaN", t=t + dt)
    return rn, un


# --------------------------------------------------------------------------
# simulation driver


@dataclass
class SimulationLog:
    t: np.ndarray
    H: np.ndarray
    P: np.ndarray
    min_rho: np.ndarray
    snapshots: list
    final: FieldState


def simulate(model: FluidModel, state: FieldState, grid: Grid, T: float,
             endstate: EndState, scheme: str = "rk4_primitive", order: int = 4,
             dt: float | None = None, log_every: float = 0.5,
             snapshot_every: float | None = None) -> SimulationLog:
    """Advance a state to time T, logging conservation diagnostics."""
    if dt is None:
        dt = cfl_dt(model, state, grid)
    nsteps = max(1, int(np.ceil(T / dt)))
    dt = T / nsteps
    log_stride = max(1, int(round(log_every / dt)))
    snap_stride = (int(round(snapshot_every / dt))
                   if snapshot_every is not None else None)

    ts, Hs, Ps, mins, snaps = [], [], [], [], []

    def log(s):
        ts.append(s.t)
        Hs.append(discrete_H(model, s, grid, endstate, order))
        Ps.append(discrete_P(s, endstate, grid))
        mins.append(float(np.min(s.rho)))

    log(state)
    if snap_stride is not None:
        snaps.append((state.t, state.copy()))
    s = state
    for k in range(1, nsteps + 1):
        s = step_nonlinear(model, s, grid, dt, scheme, order)
        if k % log_stride == 0 or k == nsteps:
            log(s)
        if snap_stride is not None and (k % snap_stride == 0 or k == nsteps):
            snaps.append((s.t, s.copy()))
    return SimulationLog(np.array(ts), np.array(Hs), np.array(Ps),
                         np.array(mins), snaps, s)
