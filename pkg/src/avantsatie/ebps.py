"""Example-based posture synthesis: a per-expression grid of postures
indexed by gaze yaw/pitch, queried by bilinear interpolation in joint
space.

The grid shape is fixed at 15 yaw knots (-70..70 deg, 10 deg apart) by
2 pitch knots (0 and 80 deg); queries outside the envelope clamp to it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .chain import KinematicChain, Direction, Posture, satisfies_limits
from .erik import ErikSettings, ExpressionPosture, erik_solve
from .errors import ContractViolationError, GridBuildError, LoadError
from .geometry import wrap_angle

YAW_KNOTS_DEG: tuple[float, ...] = tuple(float(y) for y in range(-70, 71, 10))
PITCH_KNOTS_DEG: tuple[float, ...] = (0.0, 80.0)


def direction_from_yaw_pitch(yaw_deg: float, pitch_deg: float):
    """Unit gaze direction in the base frame for yaw (+left) and pitch (+up)."""
    yaw = math.radians(yaw_deg)
    pitch = math.radians(pitch_deg)
    cp = math.cos(pitch)
    return (cp * math.cos(yaw), cp * math.sin(yaw), math.sin(pitch))


def yaw_pitch_from_direction(direction) -> tuple[float, float]:
    """Inverse of direction_from_yaw_pitch, degrees."""
    x, y, z = direction
    yaw = math.degrees(math.atan2(y, x))
    pitch = math.degrees(math.atan2(z, math.hypot(x, y)))
    return yaw, pitch


@dataclass(frozen=True)
class PostureGrid:
    """Authored (or solver-generated) postures at every (yaw, pitch) knot
    for one expression. postures[i][j] belongs to (yaw_knots[i], pitch_knots[j])."""

    expression: str
    yaw_knots_deg: tuple[float, ...]
    pitch_knots_deg: tuple[float, ...]
    postures: tuple[tuple[Posture, ...], ...]

    def __post_init__(self):
        yaws = tuple(float(v) for v in self.yaw_knots_deg)
        pitches = tuple(float(v) for v in self.pitch_knots_deg)
        if yaws != YAW_KNOTS_DEG or pitches != PITCH_KNOTS_DEG:
            raise ContractViolationError(
                "grid knots must be 15 yaw values -70..70 step 10 and pitch values (0, 80)"
            )
        if any(yaws[i] >= yaws[i + 1] for i in range(len(yaws) - 1)):
            raise ContractViolationError("yaw knots must be strictly increasing")
        if len(self.postures) != len(yaws) or any(len(col) != len(pitches) for col in self.postures):
            raise ContractViolationError("grid postures must be 15 x 2")
        object.__setattr__(self, "yaw_knots_deg", yaws)
        object.__setattr__(self, "pitch_knots_deg", pitches)
        object.__setattr__(self, "postures", tuple(tuple(col) for col in self.postures))

    @property
    def knot_count(self) -> int:
        return len(self.yaw_knots_deg) * len(self.pitch_knots_deg)


def _bracket(knots: tuple[float, ...], value: float) -> tuple[int, int, float]:
    """Indices of the two nearest knots and the interpolation fraction,
    clamping out-of-range queries onto the knot range."""
    if value <= knots[0]:
        return 0, 0, 0.0
    if value >= knots[-1]:
        return len(knots) - 1, len(knots) - 1, 0.0
    for i in range(len(knots) - 1):
        if value < knots[i + 1]:
            frac = (value - knots[i]) / (knots[i + 1] - knots[i])
            return i, i + 1, frac
    return len(knots) - 1, len(knots) - 1, 0.0


def _lerp_posture(a: Posture, b: Posture, frac: float) -> Posture:
    if frac == 0.0:
        return a
    if frac == 1.0:
        return b
    return Posture(tuple(
        wrap_angle(x + frac * wrap_angle(y - x)) for x, y in zip(a.angles, b.angles)
    ))


def ebps_synthesize(grid: PostureGrid, yaw_deg: float, pitch_deg: float) -> Posture:
    """Bilinear interpolation between the nearest knots; exact at knots,
    shortest-arc per joint, clamped to the envelope outside it."""
    y0, y1, yf = _bracket(grid.yaw_knots_deg, float(yaw_deg))
    p0, p1, pf = _bracket(grid.pitch_knots_deg, float(pitch_deg))
    low = _lerp_posture(grid.postures[y0][p0], grid.postures[y1][p0], yf)
    if p0 == p1:
        return low
    high = _lerp_posture(grid.postures[y0][p1], grid.postures[y1][p1], yf)
    return _lerp_posture(low, high, pf)


def build_grid_from_erik(
    chain: KinematicChain,
    expression: ExpressionPosture,
    settings: ErikSettings | None = None,
) -> PostureGrid:
    """Solve the expression at every envelope knot and store the results.

    This is the default grid author; hand-authored grids can be loaded from
    file instead. A non-converging knot aborts the build, naming the knot.
    """
    settings = settings or ErikSettings()
    columns = []
    for yaw in YAW_KNOTS_DEG:
        col = []
        for pitch in PITCH_KNOTS_DEG:
            target = Direction(direction_from_yaw_pitch(yaw, pitch))
            posture, report = erik_solve(chain, expression, target, settings)
            if not report.converged:
                raise GridBuildError(
                    f"solve for {expression.name!r} did not converge at knot "
                    f"(yaw {yaw:g} deg, pitch {pitch:g} deg): error {report.angle_error:.5f} rad"
                )
            col.append(posture)
        columns.append(tuple(col))
    return PostureGrid(
        expression=expression.name,
        yaw_knots_deg=YAW_KNOTS_DEG,
        pitch_knots_deg=PITCH_KNOTS_DEG,
        postures=tuple(columns),
    )


# ---------------------------------------------------------------------------
# Grid files: degrees on disk.

def grid_to_dict(grid: PostureGrid) -> dict:
    return {
        "expression": grid.expression,
        "yaw_deg": list(grid.yaw_knots_deg),
        "pitch_deg": list(grid.pitch_knots_deg),
        "postures": [
            [list(p.degrees()) for p in col]
            for col in grid.postures
        ],
    }


def grid_from_dict(data: dict, chain: KinematicChain | None = None) -> PostureGrid:
    try:
        grid = PostureGrid(
            expression=data["expression"],
            yaw_knots_deg=tuple(data["yaw_deg"]),
            pitch_knots_deg=tuple(data["pitch_deg"]),
            postures=tuple(
                tuple(Posture.from_degrees(p) for p in col)
                for col in data["postures"]
            ),
        )
    except (KeyError, TypeError) as exc:
        raise LoadError(f"malformed posture grid: {exc!r}") from exc
    if chain is not None:
        for col in grid.postures:
            for p in col:
                if len(p) != len(chain):
                    raise LoadError("grid posture length does not match chain")
                if not satisfies_limits(chain, p):
                    raise LoadError("grid contains a posture outside chain limits")
    return grid


def grids_to_dict(grids: dict[str, PostureGrid]) -> dict:
    return {"grids": [grid_to_dict(g) for g in grids.values()]}


def grids_from_dict(data: dict, chain: KinematicChain | None = None) -> dict[str, PostureGrid]:
    try:
        entries = data["grids"]
    except (KeyError, TypeError) as exc:
        raise LoadError(f"malformed grid set: {exc!r}") from exc
    out = {}
    for entry in entries:
        grid = grid_from_dict(entry, chain)
        out[grid.expression] = grid
    return out


def load_grids(path: str, chain: KinematicChain | None = None) -> dict[str, PostureGrid]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise LoadError(f"cannot read grid file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"grid file {path} is not valid JSON: {exc}") from exc
    return grids_from_dict(data, chain)


def save_grids(grids: dict[str, PostureGrid], path: str) -> None:
    with open(path, "w") as fh:
        json.dump(grids_to_dict(grids), fh, indent=2)
