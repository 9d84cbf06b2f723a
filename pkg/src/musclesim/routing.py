"""Polyline muscle paths placed by linear blend skinning.

Each anchor is bound to one or more bones with blend weights and local
offsets; its world position is the weighted sum of the bone transforms
applied to those offsets. Muscle length is the polyline length, and a scalar
muscle force is distributed to the anchors as pulls toward their neighbours.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import MuscleSimError

DEGENERATE_SEGMENT = 1e-9
_ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class BonePose:
    """Rigid bone transform: ``x_world = rotation @ x_local + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=float)
        trans = np.asarray(self.translation, dtype=float)
        if rot.shape != (3, 3) or trans.shape != (3,):
            raise MuscleSimError("rotation must be 3x3 and translation a 3-vector")
        if not (np.all(np.isfinite(rot)) and np.all(np.isfinite(trans))):
            raise MuscleSimError("bone pose must be finite")
        if np.max(np.abs(rot @ rot.T - np.eye(3))) > _ORTHO_TOL:
            raise MuscleSimError("rotation is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > _ORTHO_TOL:
            raise MuscleSimError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    def apply(self, x):
        return self.rotation @ np.asarray(x, dtype=float) + self.translation

    def compose(self, other: "BonePose"):
        """``self`` after ``other``."""
        return BonePose(self.rotation @ other.rotation,
                        self.rotation @ other.translation + self.translation)

    def matrix(self):
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m


@dataclass(frozen=True)
class AnchorBinding:
    """Skinning weights of one anchor: ``(bone_index, weight, local_offset)`` triples."""

    bindings: tuple

    def __post_init__(self):
        if len(self.bindings) < 1:
            raise MuscleSimError("an anchor needs at least one bone binding")
        clean = []
        for item in self.bindings:
            try:
                bone, weight, offset = item
            except (TypeError, ValueError):
                raise MuscleSimError(
                    "bindings must be (bone, weight, offset) triples") from None
            offset = np.asarray(offset, dtype=float)
            if offset.shape != (3,) or not np.all(np.isfinite(offset)):
                raise MuscleSimError("anchor offset must be a finite 3-vector")
            if int(bone) != bone or bone < 0:
                raise MuscleSimError(f"bone index must be a non-negative int, got {bone}")
            if not (np.isfinite(weight) and weight >= 0):
                raise MuscleSimError(f"weights must be non-negative, got {weight}")
            clean.append((int(bone), float(weight), offset))
        total = sum(w for _, w, _ in clean)
        if abs(total - 1.0) > 1e-9:
            raise MuscleSimError(f"anchor weights must sum to 1, got {total!r}")
        object.__setattr__(self, "bindings", tuple(clean))

    @classmethod
    def rigid(cls, bone, offset):
        return cls(((bone, 1.0, offset),))


@dataclass(frozen=True)
class MusclePath:
    anchors: tuple

    def __post_init__(self):
        anchors = tuple(self.anchors)
        if len(anchors) < 2:
            raise MuscleSimError("a muscle path needs at least two anchors")
        if not all(isinstance(a, AnchorBinding) for a in anchors):
            raise MuscleSimError("anchors must be AnchorBinding instances")
        object.__setattr__(self, "anchors", anchors)

    @property
    def bones(self):
        return sorted({b for a in self.anchors for b, _, _ in a.bindings})


class GeometryUpdate(NamedTuple):
    points: np.ndarray
    length: float
    length_rate: float


def anchor_position(binding: AnchorBinding, poses: Sequence[BonePose]):
    """World position of one anchor: ``sum_i w_i * T_i(x_i)``."""
    p = np.zeros(3)
    for bone, weight, offset in binding.bindings:
        if bone >= len(poses):
            raise MuscleSimError(f"bone index {bone} out of range for {len(poses)} poses")
        pose = poses[bone]
        p += weight * (pose.rotation @ offset + pose.translation)
    return p


def anchor_positions(path: MusclePath, poses: Sequence[BonePose]):
    return np.array([anchor_position(a, poses) for a in path.anchors])


def _as_points(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise MuscleSimError("points must be an (n, 3) array")
    if pts.shape[0] < 2:
        raise MuscleSimError("a polyline needs at least two points")
    return pts


def path_length(points):
    """Sum of segment lengths [m]."""
    pts = _as_points(points)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def anchor_forces(points, f_m):
    """Per-anchor force vectors for a muscle pulling with magnitude ``f_m``.

    Every anchor is pulled toward each of its neighbours with magnitude
    ``f_m``; the end anchors have a single neighbour. Segments shorter than
    ``DEGENERATE_SEGMENT`` contribute nothing.
    """
    pts = _as_points(points)
    f_m = float(f_m)
    if not np.isfinite(f_m) or f_m < 0:
        raise MuscleSimError(f"muscle force must be finite and >= 0, got {f_m}")
    seg = np.diff(pts, axis=0)
    norms = np.linalg.norm(seg, axis=1)
    units = np.zeros_like(seg)
    ok = norms >= DEGENERATE_SEGMENT
    units[ok] = seg[ok] / norms[ok, None]
    forces = np.zeros_like(pts)
    forces[:-1] += f_m * units
    forces[1:] -= f_m * units
    return forces


def geometry_update(path: MusclePath, poses: Sequence[BonePose],
                    prev_length: Optional[float], dt):
    """Anchor points, length and finite-difference length rate.

    ``prev_length=None`` (first frame) gives a zero rate.
    """
    if not dt > 0:
        raise MuscleSimError(f"dt must be > 0, got {dt}")
    pts = anchor_positions(path, poses)
    length = path_length(pts)
    rate = 0.0 if prev_length is None else (length - prev_length) / dt
    return GeometryUpdate(pts, length, rate)
