"""Articulated hinge-joint chain: forward kinematics, limits, posture math.

Conventions used throughout the package:
  - one rotational degree of freedom per joint; multi-axis joints are
    modeled as stacked zero-offset hinges
  - each joint's child segment extends along the joint's local +x axis
  - angles are radians wrapped to (-pi, pi], lengths are meters; degrees
    appear only at file/CLI boundaries
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import ContractViolationError, DegenerateTargetError, LoadError
from .geometry import (
    IDENTITY_QUAT,
    Quat,
    Vec3,
    X_AXIS,
    angle_between,
    quat_from_axis_angle,
    quat_mul,
    quat_norm,
    quat_rotate,
    vec_add,
    vec_norm,
    vec_normalize,
    vec_scale,
    vec_sub,
    wrap_angle,
)

SEGMENT_AXIS: Vec3 = X_AXIS


@dataclass(frozen=True)
class FrameTransform:
    """Rigid pose: position in meters plus a unit quaternion orientation."""

    position: Vec3 = (0.0, 0.0, 0.0)
    orientation: Quat = IDENTITY_QUAT

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))
        q = tuple(float(c) for c in self.orientation)
        if abs(quat_norm(q) - 1.0) > 1e-9:
            raise ContractViolationError(f"orientation quaternion is not unit length: {q}")
        object.__setattr__(self, "orientation", q)


IDENTITY_FRAME = FrameTransform()


@dataclass(frozen=True)
class JointSpec:
    """One hinge: local rotation axis, child segment length, angle limits."""

    rotation_axis: Vec3
    segment_length: float
    limit: tuple[float, float] = (-math.pi, math.pi)

    def __post_init__(self):
        axis = tuple(float(c) for c in self.rotation_axis)
        n = vec_norm(axis)
        if abs(n - 1.0) > 1e-6:
            raise ContractViolationError(f"rotation axis must be unit length, got norm {n}")
        object.__setattr__(self, "rotation_axis", vec_normalize(axis))
        length = float(self.segment_length)
        if not (length > 0.0 and math.isfinite(length)):
            raise ContractViolationError(f"segment length must be positive, got {length}")
        object.__setattr__(self, "segment_length", length)
        lo, hi = (float(self.limit[0]), float(self.limit[1]))
        if not (lo <= hi):
            raise ContractViolationError(f"limit interval must satisfy min <= max, got {self.limit}")
        if lo < -math.pi - 1e-9 or hi > math.pi + 1e-9:
            raise ContractViolationError(f"limits must lie within [-pi, pi], got {self.limit}")
        object.__setattr__(self, "limit", (lo, hi))


@dataclass(frozen=True)
class KinematicChain:
    """A serial chain of hinge joints rooted at base_frame.

    effector_axis is the end effector's forward/gaze axis expressed in its
    own local frame.
    """

    joints: tuple[JointSpec, ...]
    effector_axis: Vec3 = X_AXIS
    base_frame: FrameTransform = field(default_factory=FrameTransform)

    def __post_init__(self):
        joints = tuple(self.joints)
        if len(joints) < 1:
            raise ContractViolationError("chain needs at least one joint")
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "effector_axis", vec_normalize(tuple(float(c) for c in self.effector_axis)))

    def __len__(self) -> int:
        return len(self.joints)

    @property
    def total_length(self) -> float:
        return sum(j.segment_length for j in self.joints)


@dataclass(frozen=True)
class Posture:
    """One angle per joint, radians, wrapped to (-pi, pi] at construction."""

    angles: tuple[float, ...]

    def __post_init__(self):
        wrapped = []
        for a in self.angles:
            a = float(a)
            if not math.isfinite(a):
                raise ContractViolationError(f"posture angle is not finite: {a}")
            wrapped.append(wrap_angle(a))
        object.__setattr__(self, "angles", tuple(wrapped))

    def __len__(self) -> int:
        return len(self.angles)

    @classmethod
    def from_degrees(cls, angles_deg) -> "Posture":
        return cls(tuple(math.radians(a) for a in angles_deg))

    def degrees(self) -> tuple[float, ...]:
        return tuple(math.degrees(a) for a in self.angles)


@dataclass(frozen=True)
class Direction:
    """Gaze target: a unit direction in the chain base frame."""

    vector: Vec3

    def __post_init__(self):
        v = tuple(float(c) for c in self.vector)
        if vec_norm(v) < 1e-12:
            raise DegenerateTargetError("gaze direction cannot be the zero vector")
        object.__setattr__(self, "vector", vec_normalize(v))


@dataclass(frozen=True)
class Point:
    """Gaze target: a point in meters in the chain base frame."""

    position: Vec3

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in self.position))


GazeTarget = Direction | Point


def _check_posture(chain: KinematicChain, posture: Posture) -> None:
    if len(posture) != len(chain):
        raise ContractViolationError(
            f"posture has {len(posture)} angles but chain has {len(chain)} joints"
        )


def _fk_arrays(chain: KinematicChain, angles) -> tuple[list[Vec3], list[Quat]]:
    """Fast-path FK: joint positions (N+1, last is the effector) and composed
    orientations per joint (N). No dataclass wrapping."""
    pos = chain.base_frame.position
    q = chain.base_frame.orientation
    positions = [pos]
    quats = []
    for joint, theta in zip(chain.joints, angles):
        q = quat_mul(q, quat_from_axis_angle(joint.rotation_axis, theta))
        quats.append(q)
        pos = vec_add(pos, vec_scale(quat_rotate(q, SEGMENT_AXIS), joint.segment_length))
        positions.append(pos)
    return positions, quats


def forward_kinematics(chain: KinematicChain, posture: Posture) -> tuple[FrameTransform, ...]:
    """Compose frames root-to-tip; returns N+1 frames (joints then effector)."""
    _check_posture(chain, posture)
    positions, quats = _fk_arrays(chain, posture.angles)
    # joint i's frame sits at joint i's position with its rotation applied;
    # the effector frame shares the last joint's orientation
    frames = [FrameTransform(positions[i], quats[i]) for i in range(len(chain))]
    frames.append(FrameTransform(positions[-1], quats[-1]))
    return tuple(frames)


def effector_position(chain: KinematicChain, posture: Posture) -> Vec3:
    _check_posture(chain, posture)
    positions, _ = _fk_arrays(chain, posture.angles)
    return positions[-1]


def effector_gaze_direction(chain: KinematicChain, posture: Posture) -> Vec3:
    """The effector's forward axis expressed in the base frame; unit length."""
    _check_posture(chain, posture)
    _, quats = _fk_arrays(chain, posture.angles)
    return quat_rotate(quats[-1], chain.effector_axis)


def clamp_to_limits(chain: KinematicChain, posture: Posture) -> Posture:
    """Project each angle into its joint's limit interval; idempotent."""
    _check_posture(chain, posture)
    clamped = tuple(
        min(max(theta, joint.limit[0]), joint.limit[1])
        for theta, joint in zip(posture.angles, chain.joints)
    )
    return Posture(clamped)


def satisfies_limits(chain: KinematicChain, posture: Posture, tol: float = 1e-12) -> bool:
    _check_posture(chain, posture)
    return all(
        joint.limit[0] - tol <= theta <= joint.limit[1] + tol
        for theta, joint in zip(posture.angles, chain.joints)
    )


def posture_distance(a: Posture, b: Posture) -> float:
    """Mean absolute per-joint angular difference on the circle, in [0, pi]."""
    if len(a) != len(b):
        raise ContractViolationError(f"posture lengths differ: {len(a)} vs {len(b)}")
    total = 0.0
    for x, y in zip(a.angles, b.angles):
        total += abs(wrap_angle(x - y))
    return total / len(a.angles)


def resolve_target_direction(chain: KinematicChain, posture: Posture, target: GazeTarget) -> Vec3:
    """Unit direction for a gaze target; Point targets are taken from the
    posture's current effector position."""
    if isinstance(target, Direction):
        return target.vector
    rel = vec_sub(target.position, effector_position(chain, posture))
    if vec_norm(rel) < 1e-9:
        raise DegenerateTargetError("point target coincides with the effector position")
    return vec_normalize(rel)


def angle_error_to_target(chain: KinematicChain, posture: Posture, target: GazeTarget) -> float:
    """Angle in [0, pi] between the effector gaze direction and the target."""
    direction = resolve_target_direction(chain, posture, target)
    return angle_between(effector_gaze_direction(chain, posture), direction)


# ---------------------------------------------------------------------------
# Chain description files: degrees on disk, radians in memory.

def chain_to_dict(chain: KinematicChain) -> dict:
    return {
        "base": {
            "position": list(chain.base_frame.position),
            "orientation": list(chain.base_frame.orientation),
        },
        "effector_axis": list(chain.effector_axis),
        "joints": [
            {
                "axis": list(j.rotation_axis),
                "length_m": j.segment_length,
                "limit_deg": [math.degrees(j.limit[0]), math.degrees(j.limit[1])],
            }
            for j in chain.joints
        ],
    }


def chain_from_dict(data: dict) -> KinematicChain:
    try:
        joints = tuple(
            JointSpec(
                rotation_axis=tuple(j["axis"]),
                segment_length=j["length_m"],
                limit=(math.radians(j["limit_deg"][0]), math.radians(j["limit_deg"][1])),
            )
            for j in data["joints"]
        )
        base = data.get("base") or {}
        base_frame = FrameTransform(
            position=tuple(base.get("position", (0.0, 0.0, 0.0))),
            orientation=tuple(base.get("orientation", IDENTITY_QUAT)),
        )
        return KinematicChain(
            joints=joints,
            effector_axis=tuple(data.get("effector_axis", X_AXIS)),
            base_frame=base_frame,
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise LoadError(f"malformed chain description: {exc!r}") from exc


def load_chain(path: str) -> KinematicChain:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise LoadError(f"cannot read chain file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"chain file {path} is not valid JSON: {exc}") from exc
    return chain_from_dict(data)


def save_chain(chain: KinematicChain, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(chain_to_dict(chain), fh, indent=2)
