"""Muscle-space PD control with fatigue applied as a clip.

Per muscle and per step:

1. place anchors and measure length and length rate,
2. turn the action into a target length and compute a non-negative PD force,
3. clip that force into the range reachable in one step given the fatigue
   state (lower bound at ``u = 0``, upper at ``u = 1``),
4. recover the activation that produces the clipped force and advance the
   fatigue compartments with it.

Because force is affine and increasing in activation, clipping in force
space and clipping in activation space give the same result.
"""
from dataclasses import dataclass
from enum import Enum
from math import isfinite
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ._backend import kernels
from .errors import MuscleSimError
from .fatigue import FatigueParams, FatigueState, _check_dt, activation_bounds_3ccr
from .hill import MuscleMechanics, NormalizedMuscleState, active_gain, normalize_length
from .routing import BonePose, MusclePath, anchor_positions, geometry_update, path_length

ACTION_RANGE = (-1.0, 1.0)


class Saturation(str, Enum):
    NONE = "none"
    LOWER = "lower"
    UPPER = "upper"


_SAT = {-1: Saturation.LOWER, 0: Saturation.NONE, 1: Saturation.UPPER}


@dataclass(frozen=True)
class PdGains:
    k_p: float
    k_d: float

    def __post_init__(self):
        if not (isfinite(self.k_p) and self.k_p > 0):
            raise MuscleSimError(f"k_p must be > 0, got {self.k_p}")
        if not (isfinite(self.k_d) and self.k_d >= 0):
            raise MuscleSimError(f"k_d must be >= 0, got {self.k_d}")

    @classmethod
    def for_muscle(cls, f_m0):
        """Stiffness numerically equal to the max isometric force, damping a tenth of it."""
        return cls(float(f_m0), 0.1 * float(f_m0))


@dataclass(frozen=True)
class MuscleDefinition:
    """Everything needed to simulate one muscle.

    ``l_tpose`` is the reference length for actions; when omitted it is the
    path length with every bone at the identity pose.
    """

    name: str
    mech: MuscleMechanics
    path: MusclePath
    gains: Optional[PdGains] = None
    l_tpose: Optional[float] = None

    def __post_init__(self):
        if self.gains is None:
            object.__setattr__(self, "gains", PdGains.for_muscle(self.mech.f_m0))
        if self.l_tpose is None:
            n_bones = max(self.path.bones) + 1
            rest = anchor_positions(self.path, [BonePose.identity()] * n_bones)
            object.__setattr__(self, "l_tpose", path_length(rest))
        if not self.l_tpose > 0:
            raise MuscleSimError(f"{self.name}: reference length must be > 0")


class MuscleMemory(NamedTuple):
    """Previous-frame values needed for finite-difference rates."""

    length: Optional[float] = None
    l_bar: Optional[float] = None


@dataclass(frozen=True)
class MuscleControlResult:
    applied_force: float
    next_activation: float
    implied_transfer: float
    saturated: Saturation
    fatigue: FatigueState
    f_pd: float
    f_lb: float
    f_ub: float
    points: np.ndarray
    length: float
    length_rate: float
    normalized: NormalizedMuscleState
    gain_floored: bool

    @property
    def memory(self):
        return MuscleMemory(self.length, self.normalized.l_bar)


def target_length(action, l_tpose):
    """Target muscle length ``(action + 1) * l_tpose``."""
    action = float(action)
    if not (isfinite(action) and ACTION_RANGE[0] <= action <= ACTION_RANGE[1]):
        raise MuscleSimError(f"action must lie in {list(ACTION_RANGE)}, got {action}")
    if not l_tpose > 0:
        raise MuscleSimError(f"reference length must be > 0, got {l_tpose}")
    target = (action + 1.0) * l_tpose
    if target <= 0:
        raise MuscleSimError(f"action {action} gives a non-positive target length")
    return target


def pd_force(target, l_M, l_dot_M, gains: PdGains):
    """Contractile-only PD force ``max(0, k_p (target - l) - k_d l_dot)``."""
    f = gains.k_p * (target - l_M) - gains.k_d * l_dot_M
    return f if f > 0.0 else 0.0


def desired_activation(f_pd, state: NormalizedMuscleState, mech: MuscleMechanics):
    """Activation that would produce ``f_pd``; not clipped to [0, 1]."""
    pe = kernels.fl_passive(state.l_bar)
    return (f_pd / mech.f_m0 - pe) / active_gain(state)


def force_bounds(fstate: FatigueState, nstate: NormalizedMuscleState,
                 mech: MuscleMechanics, dt, p: FatigueParams = FatigueParams()):
    """Force range [N] reachable in one step, using the floored active gain."""
    b = activation_bounds_3ccr(fstate, dt, p)
    gain = active_gain(nstate)
    pe = kernels.fl_passive(nstate.l_bar)
    return mech.f_m0 * (b.lower * gain + pe), mech.f_m0 * (b.upper * gain + pe)


def apply_muscle_control(poses: Sequence[BonePose], fstate: FatigueState, action,
                         muscle: MuscleDefinition, prev: MuscleMemory, dt,
                         p: FatigueParams = FatigueParams()):
    """Run the full per-muscle pipeline for one simulation step."""
    geo = geometry_update(muscle.path, poses, prev.length, dt)
    nstate = normalize_length(geo.length, muscle.mech, prev.l_bar, dt)
    dt = _check_dt(dt, p)
    target = target_length(action, muscle.l_tpose)
    f_pd = pd_force(target, geo.length, geo.length_rate, muscle.gains)
    force, c, sat, ma, mr, mf, floored, f_lb, f_ub = kernels.muscle_control(
        f_pd, nstate.l_bar, nstate.l_bar_dot, muscle.mech.f_m0, *fstate.as_tuple(),
        float(dt), *p.kernel_args())
    return MuscleControlResult(
        applied_force=force, next_activation=ma, implied_transfer=c,
        saturated=_SAT[sat], fatigue=FatigueState(ma, mr, mf), f_pd=f_pd,
        f_lb=f_lb, f_ub=f_ub, points=geo.points, length=geo.length,
        length_rate=geo.length_rate, normalized=nstate, gain_floored=bool(floored))


def force_action_sensitivity(result: MuscleControlResult, muscle: MuscleDefinition):
    """d(applied_force)/d(action) at a fixed muscle state.

    ``k_p * l_tpose`` inside the feasible band with a positive PD force, zero
    when clipped. Undefined exactly on a kink; the caller picks a side.
    """
    if result.saturated is not Saturation.NONE or result.f_pd <= 0.0:
        return 0.0
    return muscle.gains.k_p * muscle.l_tpose
