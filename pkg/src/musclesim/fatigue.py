"""3CC-r three-compartment fatigue model.

Motor units are split into activated (``m_a``), resting (``m_r``) and
fatigued (``m_f``) fractions that always sum to one::

    dm_a/dt =  C(u) - F * m_a
    dm_r/dt = -C(u) + R_r * m_f
    dm_f/dt =  F * m_a - R_r * m_f

``C(u)`` moves units between the resting and activated pools toward the
target load ``u`` and ``R_r`` is ``r * R`` while resting (``m_a >= u``).
``m_a`` doubles as the muscle activation.

For control, the one-step activation ``K * m_a + dt * C(u)`` with
``K = 1 - dt * F`` is continuous and non-decreasing in ``u``, so the feasible
next activations form an interval. A desired activation is clipped into that
interval and the transfer rate implied by the clipped value updates the
other compartments; ``u`` itself never needs to be solved for.
"""
from dataclasses import dataclass, replace
from math import isfinite

import numpy as np

from ._backend import kernels
from .activation import ActivationBounds
from .errors import FeasibilityError, MuscleSimError

SUM_TOL = 1e-9
_FEAS_TOL = 1e-12


@dataclass(frozen=True)
class FatigueState:
    m_a: float = 0.0
    m_r: float = 1.0
    m_f: float = 0.0

    def __post_init__(self):
        for name in ("m_a", "m_r", "m_f"):
            v = getattr(self, name)
            if not (isfinite(v) and -SUM_TOL <= v <= 1.0 + SUM_TOL):
                raise MuscleSimError(f"{name} must lie in [0, 1], got {v}")
        total = self.m_a + self.m_r + self.m_f
        if abs(total - 1.0) > SUM_TOL:
            raise MuscleSimError(f"compartments must sum to 1, got {total!r}")

    @classmethod
    def fresh(cls):
        """Non-fatigued, non-activated muscle."""
        return cls(0.0, 1.0, 0.0)

    @property
    def activation(self):
        return self.m_a

    def as_tuple(self):
        return (self.m_a, self.m_r, self.m_f)


@dataclass(frozen=True)
class FatigueParams:
    """Rates of the 3CC-r model, all per second except ``rest_mult``.

    Defaults are the slow-twitch (S) muscle values used for every muscle.
    """

    f_coeff: float = 0.01
    r_coeff: float = 0.002
    rest_mult: float = 2.0
    l_d: float = 50.0
    l_r: float = 50.0

    def __post_init__(self):
        for name in ("f_coeff", "r_coeff", "rest_mult", "l_d", "l_r"):
            v = getattr(self, name)
            if not (isfinite(v) and v > 0):
                raise MuscleSimError(f"{name} must be > 0, got {v}")

    def scaled(self, factor):
        """Fatigue and recovery rates multiplied by ``factor``; F/R is kept."""
        if not factor > 0:
            raise MuscleSimError(f"fatigue scale must be > 0, got {factor}")
        return replace(self, f_coeff=self.f_coeff * factor,
                       r_coeff=self.r_coeff * factor)

    def decay(self, dt):
        """Per-step decay factor ``K = 1 - dt * F``."""
        return 1.0 - dt * self.f_coeff

    def max_stable_dt(self):
        return 1.0 / max(self.l_d, self.l_r, self.f_coeff, self.rest_mult * self.r_coeff)

    def kernel_args(self):
        return (self.f_coeff, self.r_coeff, self.rest_mult, self.l_d, self.l_r)


# Illustration parameters for the square-wave demo: fatigue fast enough that
# the resting pool empties within a 20 s load at u = 0.5.
DEMO_PARAMS = FatigueParams(f_coeff=0.1, r_coeff=0.02, rest_mult=2.0, l_d=10.0, l_r=10.0)

PRESETS = {"S": FatigueParams(), "demo": DEMO_PARAMS}


def _load(u):
    u = float(u)
    if not (isfinite(u) and 0.0 <= u <= 1.0):
        raise MuscleSimError(f"target load must lie in [0, 1], got {u}")
    return u


def _check_dt(dt, p: FatigueParams):
    dt = float(dt)
    if not (isfinite(dt) and dt > 0):
        raise MuscleSimError(f"dt must be > 0, got {dt}")
    if dt * max(p.l_d, p.l_r, p.f_coeff, p.rest_mult * p.r_coeff) >= 1.0:
        raise MuscleSimError(
            f"dt={dt} violates the stability guard (need dt < {p.max_stable_dt()})")
    return dt


def transfer_rate(u, state: FatigueState, p: FatigueParams = FatigueParams()):
    """``C(u)`` [1/s]: positive recruits resting units, negative relaxes."""
    return kernels.transfer_rate(_load(u), state.m_a, state.m_r, p.l_d, p.l_r)


def recovery_coeff(state: FatigueState, u, p: FatigueParams = FatigueParams()):
    """``R_r`` [1/s]; boosted by ``rest_mult`` while ``m_a >= u``."""
    u = _load(u)
    return p.rest_mult * p.r_coeff if state.m_a >= u else p.r_coeff


def step(state: FatigueState, u, dt, p: FatigueParams = FatigueParams()):
    """Forward-Euler step under target load ``u``."""
    dt = _check_dt(dt, p)
    return FatigueState(*kernels.fatigue_step(*state.as_tuple(), _load(u), dt,
                                              *p.kernel_args()))


def next_activation(u, state: FatigueState, dt, p: FatigueParams = FatigueParams()):
    """One-step activation ``K * m_a + dt * C(u)`` reached under load ``u``."""
    return kernels.alpha_tilde(_load(u), state.m_a, state.m_r, float(dt),
                               p.f_coeff, p.l_d, p.l_r)


def activation_bounds_3ccr(state: FatigueState, dt, p: FatigueParams = FatigueParams()):
    """Next-activation interval spanned by ``u`` in [0, 1], clipped to [0, 1]."""
    dt = _check_dt(dt, p)
    lo, hi = kernels.bounds_3ccr(state.m_a, state.m_r, dt, p.f_coeff, p.l_d, p.l_r)
    return ActivationBounds(lo, hi)


def clip_activation(alpha_pd, bounds: ActivationBounds):
    """Closest feasible activation to a desired (possibly out-of-range) one."""
    return min(max(float(alpha_pd), bounds.lower), bounds.upper)


def _check_feasible(alpha_next, state, dt, p):
    b = activation_bounds_3ccr(state, dt, p)
    if alpha_next < b.lower - _FEAS_TOL:
        raise FeasibilityError(
            f"next activation {alpha_next} is below the lower bound {b.lower}",
            "lower", b.lower)
    if alpha_next > b.upper + _FEAS_TOL:
        raise FeasibilityError(
            f"next activation {alpha_next} is above the upper bound {b.upper}",
            "upper", b.upper)
    return b


def implied_transfer(alpha_next, state: FatigueState, dt, p: FatigueParams = FatigueParams()):
    """Transfer rate ``C(u*)`` that yields ``alpha_next``, without solving for ``u*``."""
    alpha_next = float(alpha_next)
    _check_feasible(alpha_next, state, dt, p)
    return (alpha_next - p.decay(dt) * state.m_a) / dt


def step_with_target_activation(state: FatigueState, alpha_next, dt,
                                p: FatigueParams = FatigueParams()):
    """Advance all compartments given the realised next activation.

    The rest/recruit switch of ``R_r`` is read off the sign of the implied
    transfer: recruiting (``alpha_next > K * m_a``) uses ``R``, anything else
    uses ``r * R``.
    """
    alpha_next = float(alpha_next)
    _check_feasible(alpha_next, state, dt, p)
    ma, mr, mf, _ = kernels.fatigue_step_target(
        *state.as_tuple(), alpha_next, dt, p.f_coeff, p.r_coeff, p.rest_mult)
    return FatigueState(ma, mr, mf)


def solve_target_load(state: FatigueState, alpha_next, dt, p: FatigueParams = FatigueParams()):
    """Smallest target load ``u`` whose one-step activation is ``alpha_next``."""
    alpha_next = float(alpha_next)
    _check_feasible(alpha_next, state, dt, p)
    c = (alpha_next - p.decay(dt) * state.m_a) / dt
    ma, mr = state.m_a, state.m_r
    if c < 0:
        u = ma + c / p.l_r
    elif c == 0:
        u = ma
    elif c >= p.l_d * mr:
        u = ma + mr
    else:
        u = ma + c / p.l_d
    return min(max(u, 0.0), 1.0)


def integrate(state: FatigueState, loads, dt, p: FatigueParams = FatigueParams()):
    """Run a load sequence; returns an ``(len(loads) + 1, 3)`` array of states."""
    dt = _check_dt(dt, p)
    loads = np.asarray(loads, dtype=float)
    if loads.size and (not np.all(np.isfinite(loads)) or loads.min() < 0 or loads.max() > 1):
        raise MuscleSimError("target loads must lie in [0, 1]")
    return kernels.integrate_fatigue(*state.as_tuple(), loads, dt, *p.kernel_args())
