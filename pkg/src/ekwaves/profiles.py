"""Construction of kink and soliton profiles from the first-integral reduction.

A traveling wave of speed c reduces to the scalar quadrature
(1/2) K(rho) (rho')^2 = F(rho), where F collects the mass flux j, the
Bernoulli constant q and the primitive of the pressure law. Kinks connect
two transversal roots of f = F' under the equal-area condition; solitons
are homoclinic orbits whose minimum density is the largest root of F below
the endstate. Profiles are integrated with a high-order ODE solver away
from the degenerate endpoints and closed with the exact linearized
(exponential) tails once within a switching distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, root

from .errors import (ConfigError, NoKinkFoundError, NoSolitonError,
                     NumericalError, PreconditionError, ProfileError,
                     SaddleViolationError)
from .models import FluidModel

_SWITCH_FRACTION = 1e-6     # fraction of the density jump at which the
                            # exponential-tail closure takes over
_ROOT_TOL = 1e-10           # absolute tolerance on kink condition residuals
_RHOM_XTOL = 1e-12          # bracketing tolerance for the minimum density


@dataclass(frozen=True)
class EndState:
    """Far-field constant (rho, v) of a traveling wave."""

    rho: float
    v: float


@dataclass(frozen=True)
class TravelingWaveSpec:
    """First integrals and endstates pinning one traveling wave."""

    c: float
    j: float
    q: float
    right: EndState
    left: EndState | None = None
    kind: str = "soliton"


@dataclass
class WaveProfile:
    """Sampled traveling wave on the co-moving coordinate xi = x - c t."""

    xi: np.ndarray
    rho: np.ndarray
    v: np.ndarray
    spec: TravelingWaveSpec
    rho_min: float
    tail_rate_left: float = math.nan
    tail_rate_right: float = math.nan
    ode_residual: float = math.nan

    @property
    def c(self) -> float:
        return self.spec.c

    def __call__(self, x):
        """Evaluate (rho, v) with constant extension beyond the table.

        The table is uniform, so cubic Lagrange interpolation on it is
        cheap and exact at the nodes; quintic order keeps table error
        negligible even after high-order stencils. Hot path of multi-wave
        assembly.
        """
        from . import kernels
        x = np.atleast_1d(np.asarray(x, dtype=float))
        left = self.spec.left if self.spec.left is not None else self.spec.right
        dxi = self.xi[1] - self.xi[0]
        rho = kernels.interp6(self.rho, self.xi[0], dxi, x,
                              left.rho, self.spec.right.rho)
        v = kernels.interp6(self.v, self.xi[0], dxi, x,
                            left.v, self.spec.right.v)
        return rho, v

    def derivative(self, x):
        """d/dx of (rho, v) by differentiated cubic Lagrange, zero outside."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        dxi = self.xi[1] - self.xi[0]
        m = len(self.xi)
        pos = (x - self.xi[0]) / dxi
        i = np.clip(np.floor(pos).astype(np.int64), 1, m - 3)
        s = pos - i
        d0 = -(3.0 * s * s - 6.0 * s + 2.0) / 6.0
        d1 = (3.0 * s * s - 4.0 * s - 1.0) / 2.0
        d2 = -(3.0 * s * s - 2.0 * s - 2.0) / 2.0
        d3 = (3.0 * s * s - 1.0) / 6.0
        inside = (pos >= 0.0) & (pos <= m - 1)
        out = []
        for tab in (self.rho, self.v):
            d = (d0 * tab[i - 1] + d1 * tab[i] + d2 * tab[i + 1]
                 + d3 * tab[i + 2]) / dxi
            out.append(np.where(inside, d, 0.0))
        return out[0], out[1]


@dataclass(frozen=True)
class ConditionReport:
    """Kink existence conditions at candidate endstates."""

    f_minus: float
    f_plus: float
    area: float
    cond_j_minus: bool
    cond_j_plus: bool
    sign_changes: int


# --------------------------------------------------------------------------
# first integrals and scalar machinery


def first_integrals(model: FluidModel, right: EndState, c: float):
    """Mass flux j and Bernoulli constant q from the right endstate."""
    model.check_domain(right.rho)
    j = right.rho * (right.v - c)
    q = j * j / (2.0 * right.rho ** 2) + float(model.g(right.rho))
    return j, q


def _f_factory(model: FluidModel, j: float, q: float) -> Callable:
    def f(rho):
        return j * j / (2.0 * rho ** 2) - q + model.g(rho)
    return f


def _fprime(model: FluidModel, j: float, rho: float) -> float:
    return float(model.g1(rho)) - j * j / rho ** 3


def _kink_F_factory(model: FluidModel, j: float, q: float, rho_ref: float):
    """F with F(rho_ref) = 0 and F' = f (integrated momentum equation)."""
    G_ref = float(model.Gfun(rho_ref))

    def F(rho):
        return (-q * (rho - rho_ref)
                - 0.5 * j * j * (1.0 / rho - 1.0 / rho_ref)
                + model.Gfun(rho) - G_ref)
    return F


def _soliton_F_factory(model: FluidModel, right: EndState, c: float):
    """F with a double zero at the endstate density.

    F = -j^2 (rho+ - rho)^2/(2 rho rho+^2) + G(rho) - G(rho+)
        - g(rho+)(rho - rho+);
    the last term re-anchors the pressure primitive so that F' = f vanishes
    at rho+ for any normalization of g (it drops out when g(rho+) = 0).
    """
    rp = right.rho
    j = rp * (right.v - c)
    G_p = float(model.Gfun(rp))
    g_p = float(model.g(rp))

    def F(rho):
        return (-j * j * (rp - rho) ** 2 / (2.0 * rho * rp * rp)
                + model.Gfun(rho) - G_p - g_p * (rho - rp))
    return F


def saddle_check(model: FluidModel, rho: float, j: float):
    """Roots of the endstate characteristic equation.

    Real pair of opposite signs (a saddle) iff g'(rho) > j^2/rho^3; a
    center yields a purely imaginary pair.
    """
    model.check_domain(rho)
    disc = _fprime(model, j, rho)
    if disc >= 0.0:
        lam = math.sqrt(disc)
        return lam, -lam
    lam = 1j * math.sqrt(-disc)
    return lam, -lam


def kink_conditions(model: FluidModel, rho_minus: float, rho_plus: float,
                    j: float, q: float) -> ConditionReport:
    """Evaluate the root and equal-area conditions for a candidate kink."""
    model.check_domain(rho_minus)
    model.check_domain(rho_plus)
    if rho_minus == rho_plus:
        raise ConfigError("kink endstates must differ", field="rho")
    f = _f_factory(model, j, q)
    area, err, info = quad(f, rho_minus, rho_plus, epsabs=1e-14, epsrel=1e-10,
                           limit=200, full_output=True)[:3]
    if err > max(1e-12, 1e-8 * abs(area)) and err > 1e-10:
        raise NumericalError(
            f"equal-area quadrature did not converge (err={err:.2e})")
    samples = np.linspace(rho_minus, rho_plus, 2001)[1:-1]
    signs = np.sign(f(samples))
    signs = signs[signs != 0.0]
    sign_changes = int(np.sum(np.abs(np.diff(signs)) > 1))
    return ConditionReport(
        f_minus=float(f(rho_minus)), f_plus=float(f(rho_plus)),
        area=float(area),
        cond_j_minus=_fprime(model, j, rho_minus) > 0.0,
        cond_j_plus=_fprime(model, j, rho_plus) > 0.0,
        sign_changes=sign_changes)


def solve_kink_endstates(model: FluidModel, c: float, guess) -> TravelingWaveSpec:
    """Root-find the kink endstates at fixed speed.

    The mass flux is pinned from the guess through j = rho+ (v+ - c); the
    unknowns (rho-, rho+, q) must zero f at both endstates together with
    the signed area between them (the equal-area construction).
    """
    rho_m0, rho_p0, v_p0 = guess
    model.check_domain(rho_m0)
    model.check_domain(rho_p0)
    j = rho_p0 * (v_p0 - c)
    q0 = j * j / (2.0 * rho_p0 ** 2) + float(model.g(rho_p0))

    def residuals(x):
        rm, rp, q = x
        f = _f_factory(model, j, q)
        area = quad(f, rm, rp, epsabs=1e-14, epsrel=1e-10, limit=200)[0]
        return [f(rm), f(rp), area]

    sol = root(residuals, x0=[rho_m0, rho_p0, q0], method="hybr",
               options={"xtol": 1e-13, "maxfev": 400})
    rm, rp, q = sol.x
    res = np.abs(residuals(sol.x))
    if not sol.success or np.any(res > _ROOT_TOL):
        raise NoKinkFoundError(
            f"kink conditions not satisfied (residuals {res}, {sol.message})")
    if abs(rp - rm) < 1e-6 * max(1.0, abs(rp)):
        raise NoKinkFoundError("root collapsed to equal endstates "
                               f"(rho-={rm:.6g}, rho+={rp:.6g})")
    if _fprime(model, j, rm) <= 0.0 or _fprime(model, j, rp) <= 0.0:
        raise SaddleViolationError(
            "equal-area root violates the transversality condition "
            f"(f'(rho-)={_fprime(model, j, rm):.3g}, "
            f"f'(rho+)={_fprime(model, j, rp):.3g})")
    v_m = c + j / rm
    v_p = c + j / rp
    return TravelingWaveSpec(c=c, j=j, q=q, kind="kink",
                             left=EndState(rho=float(rm), v=float(v_m)),
                             right=EndState(rho=float(rp), v=float(v_p)))


# --------------------------------------------------------------------------
# profile integration


def _tail_rate(model: FluidModel, j: float, rho_end: float) -> float:
    """Spatial decay rate sqrt(f'(rho_end)/K(rho_end)) of the profile tail."""
    fp = _fprime(model, j, rho_end)
    if fp <= 0.0:
        raise ProfileError("endpoint is not a saddle; no exponential tail")
    return math.sqrt(fp / float(model.K(rho_end)))


def _march_branch(model: FluidModel, F: Callable, rho0: float, x0: float,
                  rho_end: float, xs: np.ndarray, sgn: float,
                  delta_sw: float, substep: float):
    """March rho' = sgn*sqrt(2F/K) with fixed-step RK4, recording at xs.

    Fixed steps keep the global integration error a smooth function of x
    (adaptive error control leaves per-step jitter that high-order
    difference stencils amplify catastrophically when the table is later
    resampled). Returns (values at xs, switch position, switch density);
    entries beyond the switch are owed to the exponential tail and are
    left untouched here.
    """
    def slope(rho):
        val = F(rho)
        if val <= 0.0:
            return 0.0
        return sgn * math.sqrt(2.0 * val / float(model.K(rho)))

    out = np.full(len(xs), math.nan)
    x, rho = x0, rho0
    x_sw, rho_sw = None, None
    for k, target in enumerate(xs):
        if x_sw is not None:
            break
        span = target - x
        if span <= 0.0:
            # duplicate or float-coincident sample position
            out[k] = rho
            continue
        nsub = max(1, int(math.ceil(span / substep)))
        dx_ = span / nsub
        for _ in range(nsub):
            k1 = slope(rho)
            k2 = slope(rho + 0.5 * dx_ * k1)
            k3 = slope(rho + 0.5 * dx_ * k2)
            k4 = slope(rho + dx_ * k3)
            rho = rho + dx_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            x += dx_
            if abs(rho - rho_end) <= delta_sw:
                x_sw, rho_sw = x, rho
                break
        else:
            x = target
            out[k] = rho
    if x_sw is None:
        x_sw, rho_sw = x, rho
    return out, x_sw, rho_sw


def _fill_tail(xs: np.ndarray, values: np.ndarray, x_sw: float, rho_sw: float,
               rho_end: float, lam: float) -> np.ndarray:
    """Replace not-yet-set entries by the linearized exponential tail."""
    missing = np.isnan(values)
    values[missing] = rho_end + (rho_sw - rho_end) * np.exp(
        -lam * (xs[missing] - x_sw))
    return values


def _ode_residual(model: FluidModel, F, xi: np.ndarray, rho: np.ndarray) -> float:
    from . import kernels
    h = xi[1] - xi[0]
    dr = kernels.diff1(rho, h, order=4, periodic=False)
    return float(np.max(np.abs(0.5 * model.K(rho) * dr * dr - F(rho))))


def kink_profile(model: FluidModel, spec: TravelingWaveSpec, half_width: float,
                 n: int, substeps: int = 6) -> WaveProfile:
    """Integrate a kink profile, centered at the midpoint density."""
    if spec.left is None:
        raise ConfigError("kink profile needs both endstates", field="spec")
    rm, rp = spec.left.rho, spec.right.rho
    F = _kink_F_factory(model, spec.j, spec.q, rm)
    if abs(F(rp)) > max(10.0 * _ROOT_TOL, 1e-9 * abs(rp)):
        raise ProfileError(f"integrated condition violated: F(rho+)={F(rp):.3e}")
    mid = 0.5 * (rm + rp)
    probe = rm + (rp - rm) * np.linspace(0.05, 0.95, 19)
    if min(F(r) for r in probe) < 0.0:
        raise ProfileError("F changes sign inside the connection interval")

    lam_m = _tail_rate(model, spec.j, rm)
    lam_p = _tail_rate(model, spec.j, rp)
    jump = abs(rp - rm)
    delta_sw = _SWITCH_FRACTION * jump
    xi = np.linspace(-half_width, half_width, n)
    substep = (xi[1] - xi[0]) / substeps

    rho = np.empty_like(xi)
    right = xi >= 0.0
    sgn = 1.0 if rp > rm else -1.0
    vals_r, x_sw, rho_sw = _march_branch(model, F, mid, 0.0, rp,
                                         xi[right], sgn, delta_sw, substep)
    rho[right] = _fill_tail(xi[right], vals_r, x_sw, rho_sw, rp, lam_p)
    # left branch in the mirrored coordinate s = -x (monotonicity flips)
    s_left = -xi[~right][::-1]
    vals_l, x_sw, rho_sw = _march_branch(model, F, mid, 0.0, rm,
                                         s_left, -sgn, delta_sw, substep)
    rho[~right] = _fill_tail(s_left, vals_l, x_sw, rho_sw, rm, lam_m)[::-1]

    v = spec.c + spec.j / rho
    prof = WaveProfile(xi=xi, rho=rho, v=v, spec=spec,
                       rho_min=float(np.min(rho)),
                       tail_rate_left=lam_m, tail_rate_right=lam_p)
    prof.ode_residual = _ode_residual(model, F, xi, rho)
    return prof


def soliton_min_density(model: FluidModel, right: EndState, c: float) -> float:
    """Largest root of F below the endstate density (bubble minimum).

    Requires strict subsonicity (v+ - c)^2 < rho+ g'(rho+); the root is
    bracketed by a geometric scan below rho+ and polished with Brent.
    """
    model.check_domain(right.rho)
    rp = right.rho
    j = rp * (right.v - c)
    if (right.v - c) ** 2 >= rp * float(model.g1(rp)):
        raise PreconditionError(
            f"supersonic speed: (v+-c)^2={ (right.v - c) ** 2:.6g} >= "
            f"rho+ g'(rho+)={rp * float(model.g1(rp)):.6g}")
    F = _soliton_F_factory(model, right, c)
    lo_domain = model.rho_domain[0]
    floor = max(lo_domain * (1.0 + 1e-12), 1e-12 * rp)
    # start the bracketing scan where F clears evaluation roundoff; F grows
    # quadratically off the endstate, so the first probes can be noise-level
    delta = 1e-7 * rp
    while F(rp - delta) <= 0.0:
        delta *= 4.0
        if delta > 1e-4 * rp:
            raise NoSolitonError("F is not positive below the endstate "
                                 "(zero-amplitude limit)")
    rho_hi = rp - delta
    bracket = None
    while True:
        delta *= 1.05
        rho_lo = rp - delta
        if rho_lo <= floor:
            break
        if F(rho_lo) <= 0.0:
            bracket = (rho_lo, rho_hi)
            break
        rho_hi = rho_lo
    if bracket is None:
        raise NoSolitonError("no root of F below the endstate in the "
                             "model's validity interval")
    rho_m = brentq(F, bracket[0], bracket[1], xtol=_RHOM_XTOL, rtol=1e-15)
    if rp - rho_m <= 1e-8 * rp:
        raise NoSolitonError("degenerate (zero-amplitude) soliton")
    return float(rho_m)


def soliton_profile(model: FluidModel, right: EndState, c: float,
                    half_width: float, n: int,
                    substeps: int = 6) -> WaveProfile:
    """Symmetric bubble profile with the density minimum at the origin.

    A series expansion handles the square-root degeneracy at the minimum;
    the bulk is a fixed-substep RK4 march of the quadrature form, and the
    far field beyond the switching distance is the exact linearized tail.
    """
    rho_m = soliton_min_density(model, right, c)
    rp = right.rho
    j = rp * (right.v - c)
    q = j * j / (2.0 * rp ** 2) + float(model.g(rp))
    F = _soliton_F_factory(model, right, c)
    f = _f_factory(model, j, q)

    # series at the simple zero: rho - rho_m = a2 x^2 + a4 x^4 + a6 x^6 with
    # coefficients from Phi(d) = 2F(rho_m+d)/K = A d + B d^2 + C d^3 + ...
    K_m = float(model.K(rho_m))
    A = 2.0 * float(f(rho_m)) / K_m
    if A <= 0.0:
        raise NoSolitonError("minimum density is not a simple zero of F")

    def psi(d):
        rho = rho_m + d
        return 2.0 * float(F(rho)) / float(model.K(rho)) / d

    dh = 1e-3 * (rp - rho_m)
    B = (psi(dh) - psi(-dh)) / (2.0 * dh)
    C = (psi(dh) - 2.0 * A + psi(-dh)) / (2.0 * dh * dh)
    a2 = A / 4.0
    a4 = A * B / 48.0
    a6 = A * B * B / 1440.0 + C * A * A / 320.0

    def series(x):
        x2 = x * x
        return rho_m + x2 * (a2 + x2 * (a4 + x2 * a6))

    xi = np.linspace(-half_width, half_width, n)
    dxi = xi[1] - xi[0]
    x_seed = min(0.06, max(3.0 * dxi, 0.01))
    lam = _tail_rate(model, j, rp)
    delta_sw = _SWITCH_FRACTION * (rp - rho_m)
    xa = np.abs(xi)
    order = np.argsort(xa, kind="stable")
    xs = xa[order]
    vals = np.full(n, math.nan)
    seed_mask = xs <= x_seed
    vals[seed_mask] = series(xs[seed_mask])
    marched, x_sw, rho_sw = _march_branch(
        model, F, float(series(x_seed)), x_seed, rp, xs[~seed_mask],
        1.0, delta_sw, dxi / substeps)
    vals[~seed_mask] = _fill_tail(xs[~seed_mask], marched, x_sw, rho_sw,
                                  rp, lam)
    rho = np.empty(n)
    rho[order] = vals
    v = c + j / rho
    spec = TravelingWaveSpec(c=c, j=j, q=q, right=right, kind="soliton")
    prof = WaveProfile(xi=xi, rho=rho, v=v, spec=spec, rho_min=rho_m,
                       tail_rate_left=lam, tail_rate_right=lam)
    prof.ode_residual = _ode_residual(model, F, xi, rho)
    return prof


def numerical_rank(mat, rel_tol: float = 1e-10) -> int:
    """Rank by singular values above rel_tol times the largest one."""
    svals = np.linalg.svd(np.asarray(mat, dtype=float), compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    return int(np.sum(svals > rel_tol * svals[0]))


def kink_condition_jacobian(model: FluidModel,
                            spec: TravelingWaveSpec) -> np.ndarray:
    """3x5 Jacobian of the kink conditions over (rho-, rho+, j, q, c).

    Third row in the reduced form valid at a root (the f(rho+-) entries
    drop out). The speed column is identically zero: c enters only through
    the first integrals.
    """
    if spec.left is None:
        raise ConfigError("kink spec required", field="spec")
    rm, rp, j = spec.left.rho, spec.right.rho, spec.j
    return np.array([
        [_fprime(model, j, rm), 0.0, j / rm ** 2, -1.0, 0.0],
        [0.0, _fprime(model, j, rp), j / rp ** 2, -1.0, 0.0],
        [0.0, 0.0, 0.5 * j * j * (1.0 / rm - 1.0 / rp), rm - rp, 0.0],
    ])


def kink_manifold_rank(model: FluidModel, spec: TravelingWaveSpec) -> int:
    """Numerical rank of the condition Jacobian.

    Rank three means the kinks form a two-dimensional manifold locally
    (five parameters, three transversal conditions).
    """
    return numerical_rank(kink_condition_jacobian(model, spec))


def transonic_family(model: FluidModel, right: EndState, eps_list,
                     half_width: float = 40.0, n: int = 4097):
    """Solitons with speed approaching the sound speed from below.

    For each eps the squared flux is rho+^3 g'(rho+) (1 - eps); the speed
    is taken on the right-moving branch c = v+ + sqrt(rho+ g'(rho+)(1-eps)).
    Amplitudes shrink linearly with eps near the sonic limit.
    """
    rp = right.rho
    css = rp * float(model.g1(rp))
    if css <= 0.0:
        raise PreconditionError("endstate has non-positive sound speed")
    out = []
    for eps in np.atleast_1d(eps_list):
        if not 0.0 < eps < 1.0:
            raise ConfigError(f"eps must lie in (0,1), got {eps}", field="eps")
        c = right.v + math.sqrt(css * (1.0 - eps))
        out.append(soliton_profile(model, right, c, half_width, n))
    return out
