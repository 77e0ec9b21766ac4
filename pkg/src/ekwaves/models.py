"""Pointwise thermodynamic and capillarity models.

A model bundles the pressure-law derivative g, the capillarity coefficient
K, their derivatives, and the primitive G of g with a declared anchor.
Everything is a plain callable acting on scalars or numpy arrays, so models
stay cheap to evaluate inside the time steppers; derivative consistency is
enforced by finite-difference tests, not by symbolic machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainError

ScalarFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FluidModel:
    """Pressure law g and capillarity K with derivatives.

    Gfun is the primitive of g vanishing at rho_anchor. rho_domain is the
    open interval of validity; evaluations outside it raise DomainError
    rather than extrapolating (K = 1/rho is singular at vacuum).
    """

    name: str
    g: ScalarFn
    g1: ScalarFn
    g2: ScalarFn
    Gfun: ScalarFn
    K: ScalarFn
    K1: ScalarFn
    K2: ScalarFn
    rho_anchor: float
    rho_domain: tuple[float, float] = (0.0, math.inf)

    def check_domain(self, rho) -> None:
        lo, hi = self.rho_domain
        rho = np.asarray(rho)
        if np.any(rho <= lo) or np.any(rho >= hi):
            bad = rho if rho.ndim == 0 else rho[(rho <= lo) | (rho >= hi)].flat[0]
            raise DomainError(
                f"density {bad} outside validity interval ({lo}, {hi}) "
                f"of model '{self.name}'")

    def sound_speed_sq(self, rho):
        """rho * g'(rho); negative values flag the spinodal region."""
        self.check_domain(rho)
        return rho * self.g1(rho)


def sound_speed_sq(model: FluidModel, rho):
    return model.sound_speed_sq(rho)


def _poly_model(name: str, coeffs, kval: float, rho_anchor: float) -> FluidModel:
    """Model with polynomial g (low degree) and constant capillarity."""
    c = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    if len(c.coef) > 6:
        raise ConfigError("polynomial pressure law limited to degree 5",
                          field="g_coeffs")
    d1, d2 = c.deriv(1), c.deriv(2)
    prim = c.integ(1, lbnd=rho_anchor)
    kv = float(kval)
    if kv <= 0:
        raise ConfigError("capillarity coefficient must be positive", field="kval")
    return FluidModel(
        name=name,
        g=lambda r: c(r), g1=lambda r: d1(r), g2=lambda r: d2(r),
        Gfun=lambda r: prim(r),
        K=lambda r: np.full_like(np.asarray(r, dtype=float), kv),
        K1=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        K2=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        rho_anchor=rho_anchor,
    )


def gross_pitaevskii() -> FluidModel:
    """Hydrodynamic form of the defocusing cubic Schrodinger equation.

    K = 1/rho, g = rho - 1; the primitive (rho-1)^2/2 is anchored at the
    unit background density.
    """
    return FluidModel(
        name="gross_pitaevskii",
        g=lambda r: r - 1.0,
        g1=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        g2=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        Gfun=lambda r: 0.5 * (r - 1.0) ** 2,
        K=lambda r: 1.0 / r,
        K1=lambda r: -1.0 / r ** 2,
        K2=lambda r: 2.0 / r ** 3,
        rho_anchor=1.0,
    )


def cubic_vdw() -> FluidModel:
    """Symmetric van-der-Waals-like cubic law with constant capillarity.

    g = (rho-1)(rho-2)(rho-3) is odd about rho = 2, which yields an exact
    equal-area (Maxwell) pair of endstates (1, 3) at zero flux and a
    closed-form tanh kink; used as the exact oracle for kink construction.
    """
    return _poly_model("cubic_vdw", [-6.0, 11.0, -6.0, 1.0], kval=1.0,
                       rho_anchor=1.0)


def constant_K(kval: float, g_coeffs, rho_anchor: float = 1.0,
               name: str = "constant_K") -> FluidModel:
    """User-supplied polynomial pressure law with K held at kval."""
    return _poly_model(name, g_coeffs, kval=kval, rho_anchor=rho_anchor)


_BUILTINS = {"gross_pitaevskii", "cubic_vdw", "constant_K"}


def builtin_model(name: str, kval: float | None = None, g_coeffs=None,
                  rho_anchor: float = 1.0) -> FluidModel:
    """Look up a model by name; constant_K requires kval and g_coeffs."""
    if name == "gross_pitaevskii":
        return gross_pitaevskii()
    if name == "cubic_vdw":
        return cubic_vdw()
    if name == "constant_K":
        if kval is None or g_coeffs is None:
            raise ConfigError("constant_K needs kval and g_coeffs", field="model")
        return constant_K(kval, g_coeffs, rho_anchor)
    raise ConfigError(f"unknown model '{name}' (choose from {sorted(_BUILTINS)})",
                      field="model")


def consistency_report(model: FluidModel, rho_samples) -> dict:
    """Max finite-difference mismatch of each declared derivative.

    Central differences with step 1e-5 * (1 + |rho|); the primitive is
    additionally checked against g and its anchor value.
    """
    r = np.asarray(rho_samples, dtype=float)
    model.check_domain(r)
    h = 1e-5 * (1.0 + np.abs(r))
    def fd(f):
        return (f(r + h) - f(r - h)) / (2.0 * h)
    report = {
        "G_vs_g": float(np.max(np.abs(fd(model.Gfun) - model.g(r)))),
        "g1": float(np.max(np.abs(fd(model.g) - model.g1(r)))),
        "g2": float(np.max(np.abs(fd(model.g1) - model.g2(r)))),
        "K1": float(np.max(np.abs(fd(model.K) - model.K1(r)))),
        "K2": float(np.max(np.abs(fd(model.K1) - model.K2(r)))),
        "anchor": float(abs(model.Gfun(np.asarray(model.rho_anchor)))),
        "K_positive": bool(np.all(model.K(r) > 0)),
    }
    return report
