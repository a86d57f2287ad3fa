"""Project-designed fixtures: the default desk chain, the three authored
expressions, the scene layout, and the two-level composition.

The embodiment these mimic never published its joint layout, so everything
here is a configurable stand-in, not a claim about the original hardware.
"""

from __future__ import annotations

import math

from .chain import FrameTransform, JointSpec, KinematicChain, Posture, effector_gaze_direction
from .erik import COLD, NEUTRAL, WARM, ExpressionPosture
from .game import Composition, DEFAULT_KEYBOARD, Keyboard, composition_from_dict
from .gaze import SceneLayout

_LIMIT = (math.radians(-100.0), math.radians(100.0))
_SEGMENT_M = 0.06

# 5 hinges alternating yaw (z) and pitch (y); at the zero posture the chain
# lies straight along +x gazing forward.
_AXES = ((0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


def default_chain() -> KinematicChain:
    return KinematicChain(
        joints=tuple(JointSpec(rotation_axis=a, segment_length=_SEGMENT_M, limit=_LIMIT) for a in _AXES),
        effector_axis=(1.0, 0.0, 0.0),
        base_frame=FrameTransform(),
    )


# Authored shapes, degrees on (yaw, pitch, yaw, pitch, yaw) joints:
#   neutral - relaxed arc, head slightly raised
#   warm    - tall open S-curve, head up
#   cold    - hunched closed curl, head down
_EXPRESSION_ANGLES_DEG = {
    NEUTRAL: (0.0, -20.0, 0.0, -5.0, 0.0),
    WARM: (0.0, -45.0, 0.0, 10.0, 0.0),
    COLD: (0.0, 30.0, 0.0, 35.0, 0.0),
}


def default_expressions(chain: KinematicChain | None = None) -> dict[str, ExpressionPosture]:
    chain = chain or default_chain()
    out = {}
    for name, angles_deg in _EXPRESSION_ANGLES_DEG.items():
        posture = Posture.from_degrees(angles_deg)
        out[name] = ExpressionPosture(
            name=name,
            posture=posture,
            native_direction=effector_gaze_direction(chain, posture),
        )
    return out


def default_layout(keyboard: Keyboard = DEFAULT_KEYBOARD) -> SceneLayout:
    """Desk-scale scene: piano keys fanned in front of the robot, screen
    behind them, player standing at the piano. All attended points sit at or
    above base height so gaze directions stay inside the posture envelope."""
    count = keyboard.count
    span = 1.1
    keys = tuple(
        (0.8, -span / 2 + span * i / (count - 1), 0.03)
        for i in range(count)
    )
    return SceneLayout(
        base=FrameTransform(),
        screen_center=(1.3, 0.0, 0.45),
        piano_keys=keys,
        player_home=(0.9, 0.0, 0.4),
    )


def face_position_for_key(layout: SceneLayout, key: int, height: float = 0.4):
    """Where a player's head sits while standing on a given key."""
    kx, ky, _ = layout.piano_keys[key]
    return (kx + 0.1, ky, height)


_DEFAULT_COMPOSITION = {
    "levels": [
        {
            "name": "first piece",
            "parts": [
                ["D4"],
                ["E4", "G4"],
                ["C4", "E4", "A4"],
                ["C5", "B4", "G4", "E4"],
            ],
        },
        {
            "name": "second piece",
            "parts": [
                ["F#4", "A4"],
                ["D4", "F4", "A#4"],
                ["C4", "D#4", "G4", "A4"],
                ["B4", "G#4", "E4", "C#4", "F4"],
                ["C4", "E4", "G4", "A#4", "C5", "D4"],
            ],
        },
    ]
}


def default_composition(keyboard: Keyboard = DEFAULT_KEYBOARD) -> Composition:
    return composition_from_dict(_DEFAULT_COMPOSITION, keyboard)


def toy_composition(keyboard: Keyboard = DEFAULT_KEYBOARD) -> Composition:
    """Minimal two-level composition (one single-note part per level) used
    by state-space tests."""
    return composition_from_dict(
        {"levels": [{"name": "toy 1", "parts": [["D4"]]}, {"name": "toy 2", "parts": [["G4"]]}]},
        keyboard,
    )
