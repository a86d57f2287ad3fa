"""Compound-gaze control: pick what the robot attends to each tick (player
face, screen, or a piano key), turn scene geometry into yaw/pitch targets,
and overlay the affirmative nod on top of the solved stream.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

from .chain import FrameTransform, KinematicChain, Posture, clamp_to_limits
from .errors import ContractViolationError, DegenerateTargetError, LoadError
from .game import FullReplay, Instructions, Phase, Replay
from .geometry import Vec3, quat_conjugate, quat_rotate, vec_norm, vec_sub


@dataclass(frozen=True)
class SceneLayout:
    """Where things sit around the robot, in world meters. piano_keys are
    ordered low to high along the piano axis; player_home is the default
    face position until a tracker update arrives."""

    base: FrameTransform = field(default_factory=FrameTransform)
    screen_center: Vec3 = (1.2, 0.0, 0.5)
    piano_keys: tuple[Vec3, ...] = ()
    player_home: Vec3 = (0.9, 0.0, 0.4)

    def __post_init__(self):
        keys = tuple(tuple(float(c) for c in k) for k in self.piano_keys)
        for k in keys:
            if not all(math.isfinite(c) for c in k):
                raise ContractViolationError("piano key position is not finite")
        if len(keys) >= 2:
            # strictly ordered along the piano's dominant axis
            spans = [max(k[i] for k in keys) - min(k[i] for k in keys) for i in range(3)]
            axis = spans.index(max(spans))
            coords = [k[axis] for k in keys]
            if not all(coords[i] < coords[i + 1] for i in range(len(coords) - 1)):
                raise ContractViolationError("piano keys must be strictly ordered along the piano axis")
        object.__setattr__(self, "piano_keys", keys)
        object.__setattr__(self, "screen_center", tuple(float(c) for c in self.screen_center))
        object.__setattr__(self, "player_home", tuple(float(c) for c in self.player_home))


# Attention variants -------------------------------------------------------

@dataclass(frozen=True)
class PlayerFace:
    kind = "player_face"


@dataclass(frozen=True)
class Screen:
    kind = "screen"


@dataclass(frozen=True)
class PianoKey:
    index: int
    kind = "piano_key"

    def __post_init__(self):
        if self.index < 0:
            raise ContractViolationError("piano key index must be >= 0")


@dataclass(frozen=True)
class AnimationOverlay:
    animation: str = "affirmative"
    kind = "animation_overlay"


AttentionTarget = PlayerFace | Screen | PianoKey | AnimationOverlay


def select_attention(phase: Phase, face_present: bool, replay_cursor: int | None = None) -> AttentionTarget:
    """Deterministic attention policy.

    Instruction screens win (shared attention cue), replay phases point at
    the cued key, and otherwise the robot face-tracks the player, falling
    back to the screen when no face is tracked. replay_cursor is the key
    index currently cued in a replay phase.
    """
    if isinstance(phase, Instructions):
        return Screen()
    if isinstance(phase, (Replay, FullReplay)):
        if replay_cursor is None:
            raise ContractViolationError("replay phases need the cued key index")
        return PianoKey(replay_cursor)
    return PlayerFace() if face_present else Screen()


def attended_point(layout: SceneLayout, attention: AttentionTarget, face_point: Vec3 | None = None) -> Vec3:
    if isinstance(attention, PlayerFace):
        return face_point if face_point is not None else layout.player_home
    if isinstance(attention, Screen):
        return layout.screen_center
    if isinstance(attention, PianoKey):
        if attention.index >= len(layout.piano_keys):
            raise ContractViolationError(f"piano key {attention.index} not in layout")
        return layout.piano_keys[attention.index]
    raise ContractViolationError(f"attention {attention!r} has no scene point")


def resolve_direction(
    layout: SceneLayout,
    attention: AttentionTarget,
    face_point: Vec3 | None = None,
) -> tuple[float, float]:
    """Yaw/pitch in degrees, robot base frame, toward the attended point.
    Yaw is positive to the robot's left, pitch positive upward."""
    point = attended_point(layout, attention, face_point)
    rel = vec_sub(point, layout.base.position)
    rel = quat_rotate(quat_conjugate(layout.base.orientation), rel)
    if vec_norm(rel) < 1e-9:
        raise DegenerateTargetError("attended point coincides with the robot base")
    yaw = math.degrees(math.atan2(rel[1], rel[0]))
    pitch = math.degrees(math.atan2(rel[2], math.hypot(rel[0], rel[1])))
    return yaw, pitch


# Affirmative nod ----------------------------------------------------------

@dataclass(frozen=True)
class NodSettings:
    """Damped-sinusoid nod on the last pitch joint; invented parameters,
    exposed for tuning."""

    amplitude_deg: float = 12.0
    frequency_hz: float = 2.0
    duration_s: float = 1.2


def last_pitch_joint(chain: KinematicChain) -> int:
    """Index of the most distal joint whose local axis is pitch-like
    (dominant y component); falls back to the last joint."""
    for i in range(len(chain) - 1, -1, -1):
        if abs(chain.joints[i].rotation_axis[1]) > 0.5:
            return i
    return len(chain) - 1


def affirmative_overlay(t: float, chain: KinematicChain, settings: NodSettings | None = None) -> tuple[float, ...]:
    """Per-joint angle offsets of the nod at time t since trigger; all zero
    outside [0, duration). Starts and ends at rest."""
    settings = settings or NodSettings()
    n = len(chain)
    if t < 0 or t >= settings.duration_s:
        return (0.0,) * n
    envelope = 1.0 - t / settings.duration_s
    offset = math.radians(settings.amplitude_deg) * math.sin(2.0 * math.pi * settings.frequency_hz * t) * envelope
    offsets = [0.0] * n
    offsets[last_pitch_joint(chain)] = offset
    return tuple(offsets)


def apply_overlay(chain: KinematicChain, posture: Posture, offsets: tuple[float, ...]) -> Posture:
    """Add offsets on top of a solved posture and re-clamp to limits."""
    combined = Posture(tuple(a + o for a, o in zip(posture.angles, offsets)))
    return clamp_to_limits(chain, combined)


# Files ---------------------------------------------------------------------

def layout_to_dict(layout: SceneLayout) -> dict:
    return {
        "base": {
            "position": list(layout.base.position),
            "orientation": list(layout.base.orientation),
        },
        "screen_center": list(layout.screen_center),
        "piano_keys": [list(k) for k in layout.piano_keys],
        "player_home": list(layout.player_home),
    }


def layout_from_dict(data: dict) -> SceneLayout:
    try:
        base = data.get("base") or {}
        return SceneLayout(
            base=FrameTransform(
                position=tuple(base.get("position", (0.0, 0.0, 0.0))),
                orientation=tuple(base.get("orientation", (1.0, 0.0, 0.0, 0.0))),
            ),
            screen_center=tuple(data["screen_center"]),
            piano_keys=tuple(tuple(k) for k in data["piano_keys"]),
            player_home=tuple(data.get("player_home", (0.9, 0.0, 0.4))),
        )
    except (KeyError, TypeError) as exc:
        raise LoadError(f"malformed scene layout: {exc!r}") from exc


def load_layout(path: str) -> SceneLayout:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise LoadError(f"cannot read layout file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"layout file {path} is not valid JSON: {exc}") from exc
    return layout_from_dict(data)


def save_layout(layout: SceneLayout, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(layout_to_dict(layout), fh, indent=2)


def load_face_trace(path: str) -> list[tuple[float, Vec3]]:
    """CSV of (t, x, y, z) rows; returns [(t, point)] sorted by t."""
    rows: list[tuple[float, Vec3]] = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            for i, row in enumerate(reader, start=1):
                if not row or row[0].strip().lower() == "t":
                    continue
                try:
                    t, x, y, z = (float(v) for v in row[:4])
                except ValueError as exc:
                    raise LoadError(f"face trace {path} line {i}: {exc}") from exc
                rows.append((t, (x, y, z)))
    except OSError as exc:
        raise LoadError(f"cannot read face trace {path}: {exc}") from exc
    rows.sort(key=lambda r: r[0])
    return rows
