"""Pure-Python scalar kernels.

This module and the compiled ``_kernels`` extension expose the same functions
with the same argument order. Everything here works on plain floats and does
no input validation; the public modules validate before calling in.
"""
from math import exp

import numpy as np

GAIN_FLOOR = 1e-6
_PASSIVE_DENOM = exp(4.0) - 1.0


def fl_active(l_bar):
    d = l_bar - 1.0
    return exp(-d * d / 0.5)


def fv(l_bar_dot):
    if l_bar_dot > 0.0:
        return 1.5 + 0.5 * (-10.0 + l_bar_dot) / (37.8 * l_bar_dot + 10.0)
    return (-10.0 - l_bar_dot) / (-10.0 + 5.0 * l_bar_dot)


def fl_passive(l_bar):
    if l_bar > 1.0:
        return (exp(4.0 * (l_bar - 1.0) / 0.6) - 1.0) / _PASSIVE_DENOM
    return 0.0


def active_gain(l_bar, l_bar_dot):
    g = fl_active(l_bar) * fv(l_bar_dot)
    return g if g >= GAIN_FLOOR else GAIN_FLOOR


def transfer_rate(u, ma, mr, l_d, l_r):
    if ma >= u:
        return l_r * (u - ma)
    if mr > u - ma:
        return l_d * (u - ma)
    return l_d * mr


def alpha_tilde(u, ma, mr, dt, f, l_d, l_r):
    return (1.0 - dt * f) * ma + dt * transfer_rate(u, ma, mr, l_d, l_r)


def bounds_3ccr(ma, mr, dt, f, l_d, l_r):
    k = 1.0 - dt * f
    lo = k * ma - dt * l_r * ma
    hi = k * ma + dt * l_d * mr
    return (lo if lo > 0.0 else 0.0, hi if hi < 1.0 else 1.0)


def _settle(ma, mr, mf):
    # forward Euler can undershoot zero by rounding; clamp and renormalise
    if ma < 0.0 or mr < 0.0 or mf < 0.0:
        ma = ma if ma > 0.0 else 0.0
        mr = mr if mr > 0.0 else 0.0
        mf = mf if mf > 0.0 else 0.0
        s = ma + mr + mf
        return ma / s, mr / s, mf / s
    return ma, mr, mf


def fatigue_step(ma, mr, mf, u, dt, f, r_coeff, rest_mult, l_d, l_r):
    c = transfer_rate(u, ma, mr, l_d, l_r)
    rr = rest_mult * r_coeff if ma >= u else r_coeff
    na = ma + dt * (c - f * ma)
    nr = mr + dt * (-c + rr * mf)
    nf = mf + dt * (f * ma - rr * mf)
    return _settle(na, nr, nf)


def fatigue_step_target(ma, mr, mf, alpha_next, dt, f, r_coeff, rest_mult):
    decayed = (1.0 - dt * f) * ma
    c = (alpha_next - decayed) / dt
    rr = r_coeff if alpha_next > decayed else rest_mult * r_coeff
    nr = mr + dt * (-c + rr * mf)
    nf = mf + dt * (f * ma - rr * mf)
    na, nr, nf = _settle(alpha_next, nr, nf)
    return na, nr, nf, c


def integrate_fatigue(ma, mr, mf, loads, dt, f, r_coeff, rest_mult, l_d, l_r):
    n = len(loads)
    out = np.empty((n + 1, 3))
    out[0, 0] = ma
    out[0, 1] = mr
    out[0, 2] = mf
    for i in range(n):
        ma, mr, mf = fatigue_step(ma, mr, mf, float(loads[i]), dt, f, r_coeff,
                                  rest_mult, l_d, l_r)
        out[i + 1, 0] = ma
        out[i + 1, 1] = mr
        out[i + 1, 2] = mf
    return out


def muscle_control(f_pd, l_bar, l_bar_dot, f_m0, ma, mr, mf, dt, f, r_coeff,
                   rest_mult, l_d, l_r):
    """Force clip, activation recovery and fatigue update for one muscle.

    Returns ``(force, transfer, saturated, ma, mr, mf, floored, f_lb, f_ub)``
    where ``saturated`` is -1 (lower), 0 or +1 (upper) and ``ma`` is the
    realised next activation.
    """
    raw = fl_active(l_bar) * fv(l_bar_dot)
    floored = raw < GAIN_FLOOR
    gain = GAIN_FLOOR if floored else raw
    pe = fl_passive(l_bar)
    lo, hi = bounds_3ccr(ma, mr, dt, f, l_d, l_r)
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
    na, nr, nf, c = fatigue_step_target(ma, mr, mf, alpha, dt, f, r_coeff, rest_mult)
    return force, c, sat, na, nr, nf, floored, f_lb, f_ub
