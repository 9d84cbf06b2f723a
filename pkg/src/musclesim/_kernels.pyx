# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels; a line-for-line twin of ``_kernels_py``."""
from libc.math cimport exp

import numpy as np

GAIN_FLOOR = 1e-6
cdef double _GAIN_FLOOR = 1e-6
cdef double _PASSIVE_DENOM = exp(4.0) - 1.0


cpdef double fl_active(double l_bar):
    cdef double d = l_bar - 1.0
    return exp(-d * d / 0.5)


cpdef double fv(double l_bar_dot):
    if l_bar_dot > 0.0:
        return 1.5 + 0.5 * (-10.0 + l_bar_dot) / (37.8 * l_bar_dot + 10.0)
    return (-10.0 - l_bar_dot) / (-10.0 + 5.0 * l_bar_dot)


cpdef double fl_passive(double l_bar):
    if l_bar > 1.0:
        return (exp(4.0 * (l_bar - 1.0) / 0.6) - 1.0) / _PASSIVE_DENOM
    return 0.0


cpdef double active_gain(double l_bar, double l_bar_dot):
    cdef double g = fl_active(l_bar) * fv(l_bar_dot)
    return g if g >= _GAIN_FLOOR else _GAIN_FLOOR


cpdef double transfer_rate(double u, double ma, double mr, double l_d, double l_r):
    if ma >= u:
        return l_r * (u - ma)
    if mr > u - ma:
        return l_d * (u - ma)
    return l_d * mr


cpdef double alpha_tilde(double u, double ma, double mr, double dt, double f,
                         double l_d, double l_r):
    return (1.0 - dt * f) * ma + dt * transfer_rate(u, ma, mr, l_d, l_r)


cpdef tuple bounds_3ccr(double ma, double mr, double dt, double f, double l_d,
                        double l_r):
    cdef double k = 1.0 - dt * f
    cdef double lo = k * ma - dt * l_r * ma
    cdef double hi = k * ma + dt * l_d * mr
    return (lo if lo > 0.0 else 0.0, hi if hi < 1.0 else 1.0)


cdef inline void _settle(double* ma, double* mr, double* mf):
    cdef double s
    if ma[0] < 0.0 or mr[0] < 0.0 or mf[0] < 0.0:
        if ma[0] < 0.0:
            ma[0] = 0.0
        if mr[0] < 0.0:
            mr[0] = 0.0
        if mf[0] < 0.0:
            mf[0] = 0.0
        s = ma[0] + mr[0] + mf[0]
        ma[0] = ma[0] / s
        mr[0] = mr[0] / s
        mf[0] = mf[0] / s


cdef inline void _step(double* ma, double* mr, double* mf, double u, double dt,
                       double f, double r_coeff, double rest_mult, double l_d,
                       double l_r):
    cdef double c = transfer_rate(u, ma[0], mr[0], l_d, l_r)
    cdef double rr = rest_mult * r_coeff if ma[0] >= u else r_coeff
    cdef double na = ma[0] + dt * (c - f * ma[0])
    cdef double nr = mr[0] + dt * (-c + rr * mf[0])
    cdef double nf = mf[0] + dt * (f * ma[0] - rr * mf[0])
    _settle(&na, &nr, &nf)
    ma[0] = na
    mr[0] = nr
    mf[0] = nf


cpdef tuple fatigue_step(double ma, double mr, double mf, double u, double dt,
                         double f, double r_coeff, double rest_mult, double l_d,
                         double l_r):
    _step(&ma, &mr, &mf, u, dt, f, r_coeff, rest_mult, l_d, l_r)
    return (ma, mr, mf)


cdef inline double _step_target(double* ma, double* mr, double* mf,
                                double alpha_next, double dt, double f,
                                double r_coeff, double rest_mult):
    cdef double decayed = (1.0 - dt * f) * ma[0]
    cdef double c = (alpha_next - decayed) / dt
    cdef double rr = r_coeff if alpha_next > decayed else rest_mult * r_coeff
    cdef double na = alpha_next
    cdef double nr = mr[0] + dt * (-c + rr * mf[0])
    cdef double nf = mf[0] + dt * (f * ma[0] - rr * mf[0])
    _settle(&na, &nr, &nf)
    ma[0] = na
    mr[0] = nr
    mf[0] = nf
    return c


cpdef tuple fatigue_step_target(double ma, double mr, double mf, double alpha_next,
                                double dt, double f, double r_coeff,
                                double rest_mult):
    cdef double c = _step_target(&ma, &mr, &mf, alpha_next, dt, f, r_coeff, rest_mult)
    return (ma, mr, mf, c)


def integrate_fatigue(double ma, double mr, double mf, loads, double dt, double f,
                      double r_coeff, double rest_mult, double l_d, double l_r):
    cdef double[:] u = np.ascontiguousarray(loads, dtype=np.float64)
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    out = np.empty((n + 1, 3))
    cdef double[:, :] o = out
    o[0, 0] = ma
    o[0, 1] = mr
    o[0, 2] = mf
    for i in range(n):
        _step(&ma, &mr, &mf, u[i], dt, f, r_coeff, rest_mult, l_d, l_r)
        o[i + 1, 0] = ma
        o[i + 1, 1] = mr
        o[i + 1, 2] = mf
    return out


cpdef tuple muscle_control(double f_pd, double l_bar, double l_bar_dot, double f_m0,
                           double ma, double mr, double mf, double dt, double f,
                           double r_coeff, double rest_mult, double l_d, double l_r):
    cdef double raw = fl_active(l_bar) * fv(l_bar_dot)
    cdef bint floored = raw < _GAIN_FLOOR
    cdef double gain = _GAIN_FLOOR if floored else raw
    cdef double pe = fl_passive(l_bar)
    cdef double k = 1.0 - dt * f
    cdef double lo = k * ma - dt * l_r * ma
    cdef double hi = k * ma + dt * l_d * mr
    cdef double f_lb, f_ub, force, alpha, c
    cdef int sat
    if lo < 0.0:
        lo = 0.0
    if hi > 1.0:
        hi = 1.0
    f_lb = f_m0 * (lo * gain + pe)
    f_ub = f_m0 * (hi * gain + pe)
    if f_pd < f_lb:
        force = f_lb
        sat = -1
    elif f_pd > f_ub:
        force = f_ub
        sat = 1
    else:
        force = f_pd
        sat = 0
    alpha = (force / f_m0 - pe) / gain
    if alpha < lo:
        alpha = lo
    elif alpha > hi:
        alpha = hi
    c = _step_target(&ma, &mr, &mf, alpha, dt, f, r_coeff, rest_mult)
    return (force, c, sat, ma, mr, mf, floored, f_lb, f_ub)
