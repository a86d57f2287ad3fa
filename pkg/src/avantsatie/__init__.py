"""Expressive IK for an articulated desk robot plus the hot/cold piano game
that exercises it in a closed loop."""

__version__ = "0.1.0"

from .chain import (
    Direction,
    FrameTransform,
    GazeTarget,
    JointSpec,
    KinematicChain,
    Point,
    Posture,
    angle_error_to_target,
    clamp_to_limits,
    effector_gaze_direction,
    effector_position,
    forward_kinematics,
    posture_distance,
)
from .erik import (
    ErikSettings,
    ExpressionPosture,
    FilterSettings,
    FilterState,
    SolveReport,
    erik_solve,
    motion_filter_step,
    solve_stream,
)
from .ebps import PostureGrid, build_grid_from_erik, ebps_synthesize
from .solvers import PointSolveReport, SolverSettings, bwcd_warp, ccd_solve, fabrik_solve

__all__ = [
    "Direction",
    "ErikSettings",
    "ExpressionPosture",
    "FilterSettings",
    "FilterState",
    "FrameTransform",
    "GazeTarget",
    "JointSpec",
    "KinematicChain",
    "Point",
    "PointSolveReport",
    "Posture",
    "PostureGrid",
    "SolveReport",
    "SolverSettings",
    "angle_error_to_target",
    "build_grid_from_erik",
    "bwcd_warp",
    "ccd_solve",
    "clamp_to_limits",
    "ebps_synthesize",
    "effector_gaze_direction",
    "effector_position",
    "erik_solve",
    "fabrik_solve",
    "forward_kinematics",
    "motion_filter_step",
    "posture_distance",
    "solve_stream",
]
