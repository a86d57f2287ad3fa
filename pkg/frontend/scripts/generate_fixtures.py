"""Regenerates the JSON fixtures the client tests check FK and silhouettes
against. Run from the repo root: python3 frontend/scripts/generate_fixtures.py"""

import json
import math
import os

from avantsatie.chain import Direction, Posture, chain_to_dict, forward_kinematics
from avantsatie.defaults import default_chain, default_expressions, default_layout
from avantsatie.erik import erik_solve
from avantsatie.gaze import PlayerFace, resolve_direction
from avantsatie.ebps import direction_from_yaw_pitch

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")

chain = default_chain()
expressions = default_expressions(chain)
layout = default_layout()

# FK spot checks: angles (degrees) -> joint + effector positions
fk_cases = []
for angles_deg in [
    (0, 0, 0, 0, 0),
    (30, -20, 10, 15, -40),
    (-75, 60, -30, 80, 5),
    (0, -45, 0, 10, 0),
]:
    frames = forward_kinematics(chain, Posture.from_degrees(angles_deg))
    fk_cases.append({
        "angles_deg": list(angles_deg),
        "positions": [list(f.position) for f in frames],
    })

# silhouettes for the warm/cold postures while gazing at the player's
# default standing spot (what the e2e test elicits)
face = layout.player_home
yaw, pitch = resolve_direction(layout, PlayerFace(), face_point=face)
silhouettes = {"face_point": list(face), "yaw_deg": yaw, "pitch_deg": pitch, "postures": {}}
for name in ("warm", "cold", "neutral"):
    solved, report = erik_solve(chain, expressions[name], Direction(direction_from_yaw_pitch(yaw, pitch)))
    assert report.converged
    frames = forward_kinematics(chain, solved)
    pts = [list(f.position) for f in frames]
    silhouettes["postures"][name] = {
        "angles_deg": list(solved.degrees()),
        "side": [[p[0], p[2]] for p in pts],
        "front": [[p[1], p[2]] for p in pts],
    }

os.makedirs(OUT, exist_ok=True)
with open(os.path.join(OUT, "fk_cases.json"), "w") as fh:
    json.dump({"chain": chain_to_dict(chain), "cases": fk_cases}, fh, indent=1)
with open(os.path.join(OUT, "silhouettes.json"), "w") as fh:
    json.dump(silhouettes, fh, indent=1)
print("fixtures written to", os.path.abspath(OUT))
