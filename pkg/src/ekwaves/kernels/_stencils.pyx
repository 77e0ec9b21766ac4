# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stencil kernels (hot path of the time steppers).

Mirrors ekwaves.kernels._ref function by function; the reference backend
is the source of truth for semantics and the equivalence is covered by
tests. Loops are fused where a temporary would otherwise be traversed
twice, which is where the speedup over numpy comes from.
"""

import numpy as np


cdef void _d1_into(const double[::1] f, double h, int order, bint periodic,
                   double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t i
    cdef double c2 = 1.0 / (2.0 * h)
    cdef double c12 = 1.0 / (12.0 * h)
    if order == 2:
        for i in range(1, n - 1):
            out[i] = (f[i + 1] - f[i - 1]) * c2
        if periodic:
            out[0] = (f[1] - f[n - 1]) * c2
            out[n - 1] = (f[0] - f[n - 2]) * c2
        else:
            out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * c2
            out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * c2
    else:
        for i in range(2, n - 2):
            out[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) * c12
        if periodic:
            out[0] = (-f[2] + 8.0 * f[1] - 8.0 * f[n - 1] + f[n - 2]) * c12
            out[1] = (-f[3] + 8.0 * f[2] - 8.0 * f[0] + f[n - 1]) * c12
            out[n - 2] = (-f[0] + 8.0 * f[n - 1] - 8.0 * f[n - 3] + f[n - 4]) * c12
            out[n - 1] = (-f[1] + 8.0 * f[0] - 8.0 * f[n - 2] + f[n - 3]) * c12
        else:
            out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2]
                      + 16.0 * f[3] - 3.0 * f[4]) * c12
            out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2]
                      - 6.0 * f[3] + f[4]) * c12
            out[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3]
                          + 6.0 * f[n - 4] - f[n - 5]) * c12
            out[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3]
                          - 16.0 * f[n - 4] + 3.0 * f[n - 5]) * c12


cdef inline object _as_f64(object a):
    return np.ascontiguousarray(a, dtype=np.float64)


def diff1(f, double h, int order=4, bint periodic=True):
    """First derivative by centered differences."""
    if order != 2 and order != 4:
        raise ValueError(f"unsupported order {order}")
    fa = _as_f64(f)
    out = np.empty_like(fa)
    cdef double[::1] fm = fa
    cdef double[::1] om = out
    with nogil:
        _d1_into(fm, h, order, periodic, om)
    return out


def interp4(table, double x0, double dxi, xs, double fill_left,
            double fill_right):
    """4-point Lagrange interpolation on a uniform table.

    `table` holds values at x0 + dxi*k; queries outside the table take the
    fill values. Cubic accuracy, exact at the nodes.
    """
    ta = _as_f64(table)
    xa = _as_f64(xs)
    cdef Py_ssize_t m = len(ta)
    cdef Py_ssize_t n = len(xa)
    out = np.empty(n)
    cdef double[::1] tm = ta, xm = xa, om = out
    cdef Py_ssize_t k, i
    cdef double pos, s, w0, w1, w2, w3
    with nogil:
        for k in range(n):
            pos = (xm[k] - x0) / dxi
            if pos < 0.0:
                om[k] = fill_left
                continue
            if pos > m - 1:
                om[k] = fill_right
                continue
            i = <Py_ssize_t> pos
            if i < 1:
                i = 1
            elif i > m - 3:
                i = m - 3
            s = pos - i
            w0 = -s * (s - 1.0) * (s - 2.0) / 6.0
            w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0
            w2 = -(s + 1.0) * s * (s - 2.0) / 2.0
            w3 = (s + 1.0) * s * (s - 1.0) / 6.0
            om[k] = (w0 * tm[i - 1] + w1 * tm[i] + w2 * tm[i + 1]
                     + w3 * tm[i + 2])
    return out


def interp6(table, double x0, double dxi, xs, double fill_left,
            double fill_right):
    """6-point Lagrange interpolation on a uniform table.

    Quintic accuracy; used where interpolated values feed high-order
    difference stencils, which amplify table error by inverse powers of
    the grid spacing.
    """
    ta = _as_f64(table)
    xa = _as_f64(xs)
    cdef Py_ssize_t m = len(ta)
    cdef Py_ssize_t n = len(xa)
    out = np.empty(n)
    cdef double[::1] tm = ta, xm = xa, om = out
    cdef Py_ssize_t k, i
    cdef double pos, s, sp2, sp1, sm1, sm2, sm3
    with nogil:
        for k in range(n):
            pos = (xm[k] - x0) / dxi
            if pos < 0.0:
                om[k] = fill_left
                continue
            if pos > m - 1:
                om[k] = fill_right
                continue
            i = <Py_ssize_t> pos
            if i < 2:
                i = 2
            elif i > m - 4:
                i = m - 4
            s = pos - i
            sp2 = s + 2.0
            sp1 = s + 1.0
            sm1 = s - 1.0
            sm2 = s - 2.0
            sm3 = s - 3.0
            om[k] = (sp1 * s * sm1 * sm2 * sm3 / -120.0 * tm[i - 2]
                     + sp2 * s * sm1 * sm2 * sm3 / 24.0 * tm[i - 1]
                     + sp2 * sp1 * sm1 * sm2 * sm3 / -12.0 * tm[i]
                     + sp2 * sp1 * s * sm2 * sm3 / 12.0 * tm[i + 1]
                     + sp2 * sp1 * s * sm1 * sm3 / -24.0 * tm[i + 2]
                     + sp2 * sp1 * s * sm1 * sm2 / 120.0 * tm[i + 3])
    return out


def ek_rhs(rho, v, g, K, K1, double h, int order=4, bint periodic=True):
    """Conservative-form RHS of the capillary Euler system."""
    rho_, v_, g_, K_, K1_ = (_as_f64(a) for a in (rho, v, g, K, K1))
    cdef Py_ssize_t n = len(rho_)
    dr = np.empty(n); tmp = np.empty(n)
    dHr = np.empty(n); dHu = np.empty(n)
    out_r = np.empty(n); out_v = np.empty(n)
    cdef double[::1] rm = rho_, vm = v_, gm = g_, Km = K_, K1m = K1_
    cdef double[::1] drm = dr, tmpm = tmp, dHrm = dHr, dHum = dHu
    cdef double[::1] orm = out_r, ovm = out_v
    cdef Py_ssize_t i
    with nogil:
        _d1_into(rm, h, order, periodic, drm)
        for i in range(n):
            tmpm[i] = Km[i] * drm[i]
            dHum[i] = rm[i] * vm[i]
        _d1_into(tmpm, h, order, periodic, dHrm)
        for i in range(n):
            dHrm[i] = (0.5 * vm[i] * vm[i] + gm[i]
                       + 0.5 * K1m[i] * drm[i] * drm[i] - dHrm[i])
        _d1_into(dHum, h, order, periodic, orm)
        _d1_into(dHrm, h, order, periodic, ovm)
        for i in range(n):
            orm[i] = -orm[i]
            ovm[i] = -ovm[i]
    return out_r, out_v


def gauge_rhs(rho, zre, zim, g1, a, double h, int order=4, bint periodic=True):
    """RHS for the gauge variables (rho, z = v + i w)."""
    rho_, zre_, zim_, g1_, a_ = (_as_f64(x) for x in (rho, zre, zim, g1, a))
    cdef Py_ssize_t n = len(rho_)
    dzre = np.empty(n); dzim = np.empty(n); drho = np.empty(n)
    t1 = np.empty(n); t2 = np.empty(n)
    disp_re = np.empty(n); disp_im = np.empty(n)
    out_rho = np.empty(n); out_zre = np.empty(n); out_zim = np.empty(n)
    cdef double[::1] rm = rho_, zrem = zre_, zimm = zim_, g1m = g1_, am = a_
    cdef double[::1] dzrem = dzre, dzimm = dzim, drhom = drho
    cdef double[::1] t1m = t1, t2m = t2, dispre = disp_re, dispim = disp_im
    cdef double[::1] outr = out_rho, outre = out_zre, outim = out_zim
    cdef Py_ssize_t i
    with nogil:
        _d1_into(zrem, h, order, periodic, dzrem)
        _d1_into(zimm, h, order, periodic, dzimm)
        _d1_into(rm, h, order, periodic, drhom)
        for i in range(n):
            t1m[i] = am[i] * dzrem[i]
            t2m[i] = am[i] * dzimm[i]
        _d1_into(t1m, h, order, periodic, dispre)
        _d1_into(t2m, h, order, periodic, dispim)
        for i in range(n):
            t1m[i] = rm[i] * zrem[i]
        _d1_into(t1m, h, order, periodic, outr)
        for i in range(n):
            outr[i] = -outr[i]
            outre[i] = (-(zrem[i] * dzrem[i] - zimm[i] * dzimm[i])
                        + dispim[i] - g1m[i] * drhom[i])
            outim[i] = -(zrem[i] * dzimm[i] + zimm[i] * dzrem[i]) - dispre[i]
    return out_rho, out_zre, out_zim


def apply_d2h(w0, w1, K, v, rho, r, u, double h, int order=4,
              bint periodic=True):
    """Action of the second energy variation on (r, u)."""
    w0_, w1_, K_, v_, rho_, r_, u_ = (_as_f64(x) for x in (w0, w1, K, v, rho, r, u))
    cdef Py_ssize_t n = len(r_)
    dr = np.empty(n); tmp = np.empty(n)
    m1 = np.empty(n); m2 = np.empty(n)
    cdef double[::1] w0m = w0_, w1m = w1_, Km = K_, vm = v_, rhom = rho_
    cdef double[::1] rm = r_, um = u_
    cdef double[::1] drm = dr, tmpm = tmp, m1m = m1, m2m = m2
    cdef Py_ssize_t i
    with nogil:
        _d1_into(rm, h, order, periodic, drm)
        for i in range(n):
            tmpm[i] = w1m[i] * rm[i] + Km[i] * drm[i]
        _d1_into(tmpm, h, order, periodic, m1m)
        for i in range(n):
            m1m[i] = w0m[i] * rm[i] + w1m[i] * drm[i] - m1m[i] + vm[i] * um[i]
            m2m[i] = vm[i] * rm[i] + rhom[i] * um[i]
    return m1, m2


def lin_rhs(w0, w1, K, v, rho, double cshift, r, u,
            double h, int order=4, bint periodic=True):
    """RHS of the linearized flow: J d/dx (d2H U) + cshift * d/dx U."""
    w0_, w1_, K_, v_, rho_, r_, u_ = (_as_f64(x) for x in (w0, w1, K, v, rho, r, u))
    cdef Py_ssize_t n = len(r_)
    dr = np.empty(n); tmp = np.empty(n)
    m1 = np.empty(n); m2 = np.empty(n)
    out_r = np.empty(n); out_u = np.empty(n)
    cdef double[::1] w0m = w0_, w1m = w1_, Km = K_, vm = v_, rhom = rho_
    cdef double[::1] rm = r_, um = u_
    cdef double[::1] drm = dr, tmpm = tmp, m1m = m1, m2m = m2
    cdef double[::1] orm = out_r, oum = out_u
    cdef Py_ssize_t i
    with nogil:
        _d1_into(rm, h, order, periodic, drm)
        for i in range(n):
            tmpm[i] = w1m[i] * rm[i] + Km[i] * drm[i]
        _d1_into(tmpm, h, order, periodic, m1m)
        for i in range(n):
            m1m[i] = w0m[i] * rm[i] + w1m[i] * drm[i] - m1m[i] + vm[i] * um[i]
            m2m[i] = vm[i] * rm[i] + rhom[i] * um[i]
        _d1_into(m2m, h, order, periodic, orm)
        _d1_into(m1m, h, order, periodic, oum)
        if cshift != 0.0:
            for i in range(n):
                orm[i] = -orm[i] + cshift * drm[i]
            _d1_into(um, h, order, periodic, tmpm)
            for i in range(n):
                oum[i] = -oum[i] + cshift * tmpm[i]
        else:
            for i in range(n):
                orm[i] = -orm[i]
                oum[i] = -oum[i]
    return out_r, out_u
