"""One-hinge forearm rig driven by a flexor/extensor muscle pair.

The upper arm (bone 0) is fixed; the forearm (bone 1) rotates about the
z axis through ``pivot`` and points along +x at ``theta = 0`` (horizontal),
with gravity along -y. Both muscles pass a via point blended half-and-half
between the two bones, which keeps their moment arms sign-definite over the
whole [-pi/2, pi/2] range.

The joint is integrated with semi-implicit Euler and implicit joint damping.
Muscles are commanded either with PD actions (through
:func:`musclesim.control.apply_muscle_control`) or with direct 3CC-r target
loads.
"""
from dataclasses import dataclass, field
from math import cos, isfinite, sin
from typing import Optional, Sequence, Tuple

import numpy as np

from ._backend import kernels
from .control import MuscleDefinition, MuscleMemory, PdGains, apply_muscle_control
from .errors import MuscleSimError
from .fatigue import FatigueParams, FatigueState, _check_dt
from .fatigue import step as fatigue_step
from .hill import MuscleMechanics, normalize_length
from .routing import (AnchorBinding, BonePose, MusclePath, anchor_forces,
                      anchor_positions, geometry_update, path_length)

Z_AXIS = np.array([0.0, 0.0, 1.0])
MOVING_BONE = 1


def _rig_muscle(name, side):
    s = 1.0 if side > 0 else -1.0
    path = MusclePath((
        AnchorBinding.rigid(0, (-0.23, 0.07 * s, 0.0)),
        AnchorBinding(((0, 0.5, (-0.025, 0.07 * s, 0.0)), (1, 0.5, (-0.025, 0.07 * s, 0.0)))),
        AnchorBinding.rigid(1, (0.025, 0.045 * s, 0.0)),
    ))
    rest = path_length(anchor_positions(path, [BonePose.identity()] * 2))
    mech = MuscleMechanics(f_m0=205.0, l_ori=rest, l_Tnorm=0.2, l_MTnorm=0.8)
    return MuscleDefinition(name, mech, path, gains=PdGains(2050.0, 205.0))


def default_flexor():
    return _rig_muscle("flexor", +1)


def default_extensor():
    return _rig_muscle("extensor", -1)


@dataclass(frozen=True)
class RigConfig:
    """Rig geometry, inertia and muscles.

    The default numbers are a desk-scale fixture (0.3 m, 1.5 kg rod) chosen
    so that holding the forearm horizontal needs a sizeable share of the
    flexor's strength.
    """

    bone_length: float = 0.3
    mass: float = 1.5
    inertia: Optional[float] = None
    gravity: float = 9.81
    joint_damping: float = 10.0
    pivot: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    flexor: MuscleDefinition = field(default_factory=default_flexor)
    extensor: MuscleDefinition = field(default_factory=default_extensor)
    fatigue: FatigueParams = field(default_factory=FatigueParams)

    def __post_init__(self):
        if self.inertia is None:
            object.__setattr__(self, "inertia", self.mass * self.bone_length ** 2 / 3.0)
        if not (isfinite(self.inertia) and self.inertia > 0):
            raise MuscleSimError(f"inertia must be > 0, got {self.inertia}")
        if not (isfinite(self.bone_length) and self.bone_length > 0):
            raise MuscleSimError(f"bone_length must be > 0, got {self.bone_length}")
        if self.mass < 0 or self.joint_damping < 0:
            raise MuscleSimError("mass and joint_damping must be >= 0")

    @property
    def muscles(self):
        return (self.flexor, self.extensor)


@dataclass(frozen=True)
class MuscleRuntime:
    fatigue: FatigueState = field(default_factory=FatigueState.fresh)
    memory: MuscleMemory = MuscleMemory()
    force: float = 0.0


@dataclass(frozen=True)
class RigState:
    theta: float = 0.0
    theta_dot: float = 0.0
    time: float = 0.0
    muscles: Tuple[MuscleRuntime, ...] = (MuscleRuntime(), MuscleRuntime())
    muscle_torque: float = 0.0
    gain_floor_hits: int = 0

    def __post_init__(self):
        if not (isfinite(self.theta) and isfinite(self.theta_dot)):
            raise MuscleSimError("rig state must be finite")


def bone_pose(theta, cfg: RigConfig = None):
    """Forearm transform: rotation by ``theta`` about z through the pivot."""
    theta = float(theta)
    if not isfinite(theta):
        raise MuscleSimError("theta must be finite")
    c, s = cos(theta), sin(theta)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    pivot = np.asarray(cfg.pivot if cfg is not None else (0.0, 0.0, 0.0), dtype=float)
    return BonePose(rot, pivot - rot @ pivot)


def rig_poses(theta, cfg: RigConfig):
    return [BonePose.identity(), bone_pose(theta, cfg)]


def joint_torque(anchor_points, forces, pivot, axis=Z_AXIS):
    """Moment of anchor forces about the hinge axis [N m]."""
    pts = np.asarray(anchor_points, dtype=float).reshape(-1, 3)
    fs = np.asarray(forces, dtype=float).reshape(-1, 3)
    if pts.shape != fs.shape:
        raise MuscleSimError(f"{len(pts)} anchor points but {len(fs)} forces")
    if not len(pts):
        return 0.0
    arms = pts - np.asarray(pivot, dtype=float)
    return float(np.sum(np.cross(arms, fs) @ np.asarray(axis, dtype=float)))


def muscle_joint_torque(muscle: MuscleDefinition, poses, points, f_m, pivot):
    """Torque on the moving bone from one muscle pulling with ``f_m``.

    A blended anchor hands each bone its weight's share of the anchor force,
    applied where that bone carries the anchor offset.
    """
    forces = anchor_forces(points, f_m)
    pts, fs = [], []
    pose = poses[MOVING_BONE]
    for anchor, f in zip(muscle.path.anchors, forces):
        for bone, weight, offset in anchor.bindings:
            if bone == MOVING_BONE and weight > 0:
                pts.append(pose.rotation @ offset + pose.translation)
                fs.append(weight * f)
    return joint_torque(pts, fs, pivot)


def gravity_torque(theta, cfg: RigConfig):
    return -cfg.mass * cfg.gravity * 0.5 * cfg.bone_length * cos(theta)


def mechanical_energy(state: RigState, cfg: RigConfig):
    """Kinetic plus gravitational potential energy [J]."""
    return (0.5 * cfg.inertia * state.theta_dot ** 2
            + cfg.mass * cfg.gravity * 0.5 * cfg.bone_length * sin(state.theta))


def moment_arm(muscle: MuscleDefinition, theta, cfg: RigConfig, h=1e-6):
    """``-dl/dtheta`` [m]; positive when the muscle raises the forearm."""
    lp = path_length(anchor_positions(muscle.path, rig_poses(theta + h, cfg)))
    lm = path_length(anchor_positions(muscle.path, rig_poses(theta - h, cfg)))
    return -(lp - lm) / (2.0 * h)


def muscle_length(muscle: MuscleDefinition, theta, cfg: RigConfig):
    return path_length(anchor_positions(muscle.path, rig_poses(theta, cfg)))


def _integrate_joint(state: RigState, torque, dt, cfg: RigConfig):
    i = cfg.inertia
    theta_dot = (state.theta_dot + dt * torque / i) / (1.0 + dt * cfg.joint_damping / i)
    return state.theta + dt * theta_dot, theta_dot


def step_rig(state: RigState, dt, cfg: RigConfig,
             actions: Optional[Sequence[float]] = None,
             loads: Optional[Sequence[float]] = None):
    """Advance the rig one step.

    Exactly one of ``actions`` (PD actions in [-1, 1]) or ``loads`` (3CC-r
    target loads in [0, 1]) is given, ordered as ``cfg.muscles``.
    """
    if (actions is None) == (loads is None):
        raise MuscleSimError("give exactly one of actions or loads")
    dt = _check_dt(dt, cfg.fatigue)
    commands = actions if actions is not None else loads
    if len(commands) != len(cfg.muscles):
        raise MuscleSimError(f"expected {len(cfg.muscles)} commands, got {len(commands)}")
    poses = rig_poses(state.theta, cfg)
    p = cfg.fatigue
    torque = 0.0
    floor_hits = 0
    runtimes = []
    for muscle, rt, cmd in zip(cfg.muscles, state.muscles, commands):
        if actions is not None:
            res = apply_muscle_control(poses, rt.fatigue, cmd, muscle, rt.memory, dt, p)
            force, fstate, points, memory = (res.applied_force, res.fatigue,
                                             res.points, res.memory)
            floor_hits += res.gain_floored
        else:
            force, fstate, points, memory, floored = _load_driven(
                poses, rt, cmd, muscle, dt, p)
            floor_hits += floored
        torque += muscle_joint_torque(muscle, poses, points, force, cfg.pivot)
        runtimes.append(MuscleRuntime(fstate, memory, force))
    total = torque + gravity_torque(state.theta, cfg)
    theta, theta_dot = _integrate_joint(state, total, dt, cfg)
    return RigState(theta, theta_dot, state.time + dt, tuple(runtimes), torque,
                    state.gain_floor_hits + floor_hits)


def _load_driven(poses, rt: MuscleRuntime, u, muscle: MuscleDefinition, dt, p):
    geo = geometry_update(muscle.path, poses, rt.memory.length, dt)
    ns = normalize_length(geo.length, muscle.mech, rt.memory.l_bar, dt)
    fstate = fatigue_step(rt.fatigue, u, dt, p)
    raw = kernels.fl_active(ns.l_bar) * kernels.fv(ns.l_bar_dot)
    gain = kernels.active_gain(ns.l_bar, ns.l_bar_dot)
    force = muscle.mech.f_m0 * (fstate.m_a * gain + kernels.fl_passive(ns.l_bar))
    return force, fstate, geo.points, MuscleMemory(geo.length, ns.l_bar), raw < gain


def net_torque(state: RigState, cfg: RigConfig, forces: Optional[Sequence[float]] = None):
    """Muscle plus gravity torque at ``state`` for given (or last) muscle forces."""
    poses = rig_poses(state.theta, cfg)
    if forces is None:
        forces = [rt.force for rt in state.muscles]
    tau = gravity_torque(state.theta, cfg)
    for muscle, f in zip(cfg.muscles, forces):
        pts = anchor_positions(muscle.path, poses)
        tau += muscle_joint_torque(muscle, poses, pts, f, cfg.pivot)
    return tau


def initial_state(theta, cfg: RigConfig, fatigue: Optional[Sequence[FatigueState]] = None):
    fat = fatigue or [FatigueState.fresh() for _ in cfg.muscles]
    return RigState(theta=float(theta), theta_dot=0.0,
                    muscles=tuple(MuscleRuntime(f) for f in fat))


class HoldController:
    """Angle-holding stand-in for a learned policy.

    At each control tick it picks a joint torque (gravity compensation plus a
    proportional term on the angle error), hands it to the agonist as a
    desired muscle force and converts that force into the PD action that
    produces it at the current length and rate. The antagonist is relaxed.
    """

    REST_ACTION = -0.5

    def __init__(self, cfg: RigConfig, target, stiffness=20.0):
        self.cfg = cfg
        self.target = float(target)
        self.stiffness = float(stiffness)

    def joint_torque_demand(self, state: RigState):
        return (-gravity_torque(state.theta, self.cfg)
                + self.stiffness * (self.target - state.theta))

    def actions(self, state: RigState):
        tau = self.joint_torque_demand(state)
        acts = []
        for muscle in self.cfg.muscles:
            arm = moment_arm(muscle, state.theta, self.cfg)
            f_des = tau / arm if tau * arm > 0 else 0.0
            if f_des <= 0.0:
                acts.append(self.REST_ACTION)
                continue
            length = muscle_length(muscle, state.theta, self.cfg)
            rate = -arm * state.theta_dot
            target = length + (f_des + muscle.gains.k_d * rate) / muscle.gains.k_p
            acts.append(min(max(target / muscle.l_tpose - 1.0, -1.0 + 1e-9), 1.0))
        return acts

    @classmethod
    def rest_actions(cls, cfg: RigConfig):
        return [cls.REST_ACTION] * len(cfg.muscles)


__all__ = [
    "HoldController", "MuscleRuntime", "RigConfig", "RigState", "bone_pose",
    "default_extensor", "default_flexor", "gravity_torque", "initial_state",
    "joint_torque", "mechanical_energy", "moment_arm", "muscle_joint_torque",
    "net_torque", "rig_poses", "step_rig",
]
