"""Numpy reference implementation of the stencil kernels.

Semantics of every function here define the contract the compiled backend
must reproduce (tests compare the two on random inputs). All arrays are
1-D float64; `order` is the stencil order (2 or 4); `periodic` selects
wrap-around versus one-sided boundary closures.
"""

import numpy as np


def diff1(f, h, order=4, periodic=True):
    """First derivative by centered differences."""
    f = np.asarray(f, dtype=np.float64)
    if periodic:
        if order == 2:
            return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * h)
        if order == 4:
            return (-np.roll(f, -2) + 8.0 * np.roll(f, -1)
                    - 8.0 * np.roll(f, 1) + np.roll(f, 2)) / (12.0 * h)
        raise ValueError(f"unsupported order {order}")
    out = np.empty_like(f)
    if order == 2:
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
        out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
        return out
    if order == 4:
        out[2:-2] = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
        out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2]
                  + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
        out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2]
                  - 6.0 * f[3] + f[4]) / (12.0 * h)
        out[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3]
                   + 6.0 * f[-4] - f[-5]) / (12.0 * h)
        out[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3]
                   - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
        return out
    raise ValueError(f"unsupported order {order}")


def interp4(table, x0, dxi, xs, fill_left, fill_right):
    """4-point Lagrange interpolation on a uniform table.

    `table` holds values at x0 + dxi*k; queries outside the table take the
    fill values. Cubic accuracy, exact at the nodes.
    """
    table = np.asarray(table, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    m = len(table)
    pos = (xs - x0) / dxi
    i = np.clip(np.floor(pos).astype(np.int64), 1, m - 3)
    s = pos - i
    w0 = -s * (s - 1.0) * (s - 2.0) / 6.0
    w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0
    w2 = -(s + 1.0) * s * (s - 2.0) / 2.0
    w3 = (s + 1.0) * s * (s - 1.0) / 6.0
    out = (w0 * table[i - 1] + w1 * table[i] + w2 * table[i + 1]
           + w3 * table[i + 2])
    out = np.where(pos < 0.0, fill_left, out)
    out = np.where(pos > m - 1, fill_right, out)
    return out


def interp6(table, x0, dxi, xs, fill_left, fill_right):
    """6-point Lagrange interpolation on a uniform table.

    Quintic accuracy; used where interpolated values feed high-order
    difference stencils, which amplify table error by inverse powers of
    the grid spacing.
    """
    table = np.asarray(table, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    m = len(table)
    pos = (xs - x0) / dxi
    i = np.clip(np.floor(pos).astype(np.int64), 2, m - 4)
    s = pos - i
    sp2, sp1 = s + 2.0, s + 1.0
    sm1, sm2, sm3 = s - 1.0, s - 2.0, s - 3.0
    w0 = sp1 * s * sm1 * sm2 * sm3 / -120.0
    w1 = sp2 * s * sm1 * sm2 * sm3 / 24.0
    w2 = sp2 * sp1 * sm1 * sm2 * sm3 / -12.0
    w3 = sp2 * sp1 * s * sm2 * sm3 / 12.0
    w4 = sp2 * sp1 * s * sm1 * sm3 / -24.0
    w5 = sp2 * sp1 * s * sm1 * sm2 / 120.0
    out = (w0 * table[i - 2] + w1 * table[i - 1] + w2 * table[i]
           + w3 * table[i + 1] + w4 * table[i + 2] + w5 * table[i + 3])
    out = np.where(pos < 0.0, fill_left, out)
    out = np.where(pos > m - 1, fill_right, out)
    return out


def ek_rhs(rho, v, g, K, K1, h, order=4, periodic=True):
    """Right-hand side of the capillary Euler system in conservative form.

    Returns (d rho/dt, d v/dt) = -d/dx (rho*v), -d/dx (first energy
    variation), with the gradient form of the energy variation so that the
    semidiscrete flow conserves the discrete energy exactly on periodic
    grids (the difference operator is skew there).
    """
    dr = diff1(rho, h, order, periodic)
    dHr = 0.5 * v * v + g + 0.5 * K1 * dr * dr - diff1(K * dr, h, order, periodic)
    dHu = rho * v
    return -diff1(dHu, h, order, periodic), -diff1(dHr, h, order, periodic)


def gauge_rhs(rho, zre, zim, g1, a, h, order=4, periodic=True):
    """RHS for the gauge variables (rho, z), z = v + i*w.

    Mass equation for rho (with v = Re z) and the complex advection-
    dispersion equation for z; `a` is the precomputed sqrt(rho*K) array,
    `g1` the pressure-law derivative at rho.
    """
    dzre = diff1(zre, h, order, periodic)
    dzim = diff1(zim, h, order, periodic)
    drho = diff1(rho, h, order, periodic)
    conv_re = zre * dzre - zim * dzim
    conv_im = zre * dzim + zim * dzre
    disp_re = diff1(a * dzre, h, order, periodic)
    disp_im = diff1(a * dzim, h, order, periodic)
    out_rho = -diff1(rho * zre, h, order, periodic)
    out_zre = -conv_re + disp_im - g1 * drho
    out_zim = -conv_im - disp_re
    return out_rho, out_zre, out_zim


def apply_d2h(w0, w1, K, v, rho, r, u, h, order=4, periodic=True):
    """Action of the second energy variation on a perturbation (r, u).

    Coefficient arrays come from the background state: w0 is the local
    multiplier of r, w1 = K'(rho) * d rho/dx. Exact Jacobian of the
    gradient evaluated by ek_rhs, hence symmetric in the discrete L2
    pairing on periodic grids.
    """
    dr = diff1(r, h, order, periodic)
    m1 = w0 * r + w1 * dr - diff1(w1 * r + K * dr, h, order, periodic) + v * u
    m2 = v * r + rho * u
    return m1, m2


def lin_rhs(w0, w1, K, v, rho, cshift, r, u, h, order=4, periodic=True):
    """RHS of the linearized flow: J d/dx (d2H U) + cshift * d/dx U."""
    m1, m2 = apply_d2h(w0, w1, K, v, rho, r, u, h, order, periodic)
    out_r = -diff1(m2, h, order, periodic)
    out_u = -diff1(m1, h, order, periodic)
    if cshift != 0.0:
        out_r += cshift * diff1(r, h, order, periodic)
        out_u += cshift * diff1(u, h, order, periodic)
    return out_r, out_u
