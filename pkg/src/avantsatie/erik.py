"""Expressive gaze solving: warp the authored posture toward the target,
refine under joint limits, and smooth the output stream with a motion
filter.

erik_solve is pure; solve_stream owns the filter state for one stream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from .chain import (
    Direction,
    GazeTarget,
    KinematicChain,
    Point,
    Posture,
    _fk_arrays,
    posture_distance,
    resolve_target_direction,
    satisfies_limits,
)
from .errors import ContractViolationError, LoadError
from .geometry import Vec3, angle_between, quat_rotate, vec_norm, vec_normalize, wrap_angle
from .solvers import _absorption_weights, bwcd_warp, distribution_sweep

NEUTRAL = "neutral"
WARM = "warm"
COLD = "cold"
EXPRESSION_NAMES = (NEUTRAL, WARM, COLD)


@dataclass(frozen=True)
class ExpressionPosture:
    """A named authored posture plus the gaze direction it was authored at."""

    name: str
    posture: Posture
    native_direction: Vec3

    def __post_init__(self):
        object.__setattr__(self, "native_direction", vec_normalize(tuple(float(c) for c in self.native_direction)))


@dataclass(frozen=True)
class FilterSettings:
    """First-order smoothing time constant and per-joint velocity cap."""

    time_constant_s: float = 0.12
    max_velocity_rad_s: float = 3.0

    def __post_init__(self):
        if not self.time_constant_s > 0.0:
            raise ContractViolationError("filter time constant must be > 0")
        if not self.max_velocity_rad_s > 0.0:
            raise ContractViolationError("filter velocity cap must be > 0")


@dataclass(frozen=True)
class ErikSettings:
    """Solve tolerances plus the posture-pull weight of the refine phase.

    posture_pull_weight is the first-iteration pull toward the warped
    posture; it decays by posture_pull_decay each iteration so aiming can
    always converge when joint limits force a shape compromise.
    """

    tolerance: float = math.radians(1.0)
    max_iterations: int = 30
    posture_pull_weight: float = 0.5
    posture_pull_decay: float = 0.7
    warp_tolerance: float = 1e-3
    warp_max_sweeps: int = 60
    record_trace: bool = False
    filter: FilterSettings = field(default_factory=FilterSettings)

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ContractViolationError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ContractViolationError("max_iterations must be >= 1")
        if not 0.0 <= self.posture_pull_weight <= 1.0:
            raise ContractViolationError("posture_pull_weight must lie in [0, 1]")
        if not 0.0 <= self.posture_pull_decay < 1.0:
            raise ContractViolationError("posture_pull_decay must lie in [0, 1)")


@dataclass(frozen=True)
class SolveReport:
    """Result of one expressive solve: final gaze error, distance from the
    warped target posture, refine iterations used, convergence flag.
    trace carries the per-iteration error when requested."""

    angle_error: float
    posture_divergence: float
    iterations: int
    converged: bool
    trace: tuple[float, ...] | None = None


def erik_solve(
    chain: KinematicChain,
    expression: ExpressionPosture,
    target: GazeTarget,
    settings: ErikSettings | None = None,
) -> tuple[Posture, SolveReport]:
    """Aim an authored expression at a gaze target under joint limits.

    Pipeline: (1) warp the expression so it aims at the target, ignoring
    limits; (2) refine iteratively, alternating a limit-clamped aiming sweep
    with a pull of each joint back toward the warped posture; (3) return the
    limit-satisfying result. Solving toward the expression's own native
    direction returns the authored posture unchanged.
    """
    settings = settings or ErikSettings()
    if len(expression.posture) != len(chain):
        raise ContractViolationError("expression posture does not match chain")

    direction = resolve_target_direction(chain, expression.posture, target)
    dynamic_point = isinstance(target, Point)

    warped = bwcd_warp(
        chain,
        expression.posture,
        direction,
        tolerance=settings.warp_tolerance,
        max_sweeps=settings.warp_max_sweeps,
    )
    warped_angles = warped.angles
    limits = [j.limit for j in chain.joints]
    angles = [min(max(a, lo), hi) for a, (lo, hi) in zip(warped_angles, limits)]

    def fresh_error() -> float:
        # Point targets are re-resolved from wherever the effector currently
        # is, so the reported error matches angle_error_to_target
        nonlocal direction
        positions, quats = _fk_arrays(chain, angles)
        if dynamic_point:
            rel = (target.position[0] - positions[-1][0],
                   target.position[1] - positions[-1][1],
                   target.position[2] - positions[-1][2])
            if vec_norm(rel) < 1e-9:
                raise DegenerateTargetError("point target coincides with the effector position")
            direction = vec_normalize(rel)
        return angle_between(quat_rotate(quats[-1], chain.effector_axis), direction)

    error = fresh_error()
    weights = _absorption_weights(len(chain))
    pull = settings.posture_pull_weight
    iterations = 0
    trace: list[float] = []
    while error >= settings.tolerance and iterations < settings.max_iterations:
        iterations += 1
        distribution_sweep(chain, angles, direction, enforce_limits=True, weights=weights)
        if pull > 0.0:
            # pull back toward the warped shape; the weight decays so the
            # aiming phase wins once limits force a shape compromise
            angles = [
                min(max(wrap_angle(a + pull * wrap_angle(w - a)), lo), hi)
                for a, w, (lo, hi) in zip(angles, warped_angles, limits)
            ]
            pull *= settings.posture_pull_decay
        error = fresh_error()
        if settings.record_trace:
            trace.append(error)

    result = Posture(tuple(angles))
    report = SolveReport(
        angle_error=error,
        posture_divergence=posture_distance(result, warped),
        iterations=iterations,
        converged=error < settings.tolerance,
        trace=tuple(trace) if settings.record_trace else None,
    )
    return result, report


# ---------------------------------------------------------------------------
# Motion filter

@dataclass(frozen=True)
class FilterState:
    """Smoothed posture plus the per-joint velocity of the last step."""

    posture: Posture
    velocity: tuple[float, ...]

    @classmethod
    def at_rest(cls, posture: Posture) -> "FilterState":
        return cls(posture=posture, velocity=(0.0,) * len(posture))


def motion_filter_step(
    state: FilterState,
    raw: Posture,
    dt: float,
    settings: FilterSettings | None = None,
) -> FilterState:
    """One smoothing step: exponential approach with coefficient
    1 - exp(-dt/tau), then a hard per-joint velocity clamp."""
    settings = settings or FilterSettings()
    if not dt > 0.0:
        raise ContractViolationError("dt must be > 0")
    alpha = 1.0 - math.exp(-dt / settings.time_constant_s)
    max_step = settings.max_velocity_rad_s * dt
    new_angles = []
    velocity = []
    for cur, target in zip(state.posture.angles, raw.angles):
        delta = alpha * wrap_angle(target - cur)
        if delta > max_step:
            delta = max_step
        elif delta < -max_step:
            delta = -max_step
        new_angles.append(wrap_angle(cur + delta))
        velocity.append(delta / dt)
    return FilterState(posture=Posture(tuple(new_angles)), velocity=tuple(velocity))


def solve_stream(chain, expressions, targets, dt, settings: ErikSettings | None = None):
    """Run the solve + filter pipeline over parallel per-tick streams.

    Yields (filtered Posture, SolveReport) per tick. Repeated
    (expression, target) ticks reuse the previous raw solve (the solver is
    pure, so this is exact). A failing solve substitutes the last good raw
    posture and reports converged=False; a failure on the very first tick
    propagates.
    """
    settings = settings or ErikSettings()
    filter_state: FilterState | None = None
    memo_key = None
    raw: Posture | None = None
    report: SolveReport | None = None
    for expression, target in zip(expressions, targets):
        key = (expression.name, expression.posture.angles, target)
        if key != memo_key:
            try:
                raw, report = erik_solve(chain, expression, target, settings)
                memo_key = key
            except ContractViolationError:
                raise
            except Exception:
                if raw is None:
                    raise
                report = replace(report, converged=False)
                memo_key = None
        if filter_state is None:
            filter_state = FilterState.at_rest(raw)
        else:
            filter_state = motion_filter_step(filter_state, raw, dt, settings.filter)
        yield filter_state.posture, report


# ---------------------------------------------------------------------------
# Expression set files: degrees on disk, radians in memory.

def expressions_to_dict(expressions: dict[str, ExpressionPosture]) -> dict:
    return {
        "expressions": [
            {
                "name": e.name,
                "angles_deg": list(e.posture.degrees()),
                "native_direction": list(e.native_direction),
            }
            for e in expressions.values()
        ]
    }


def expressions_from_dict(data: dict, chain: KinematicChain | None = None) -> dict[str, ExpressionPosture]:
    try:
        out = {}
        for entry in data["expressions"]:
            expr = ExpressionPosture(
                name=entry["name"],
                posture=Posture.from_degrees(entry["angles_deg"]),
                native_direction=tuple(entry["native_direction"]),
            )
            out[expr.name] = expr
    except (KeyError, TypeError) as exc:
        raise LoadError(f"malformed expression set: {exc!r}") from exc
    missing = [n for n in EXPRESSION_NAMES if n not in out]
    if missing:
        raise LoadError(f"expression set is missing {missing}")
    if chain is not None:
        for expr in out.values():
            if len(expr.posture) != len(chain):
                raise LoadError(f"expression {expr.name!r} has {len(expr.posture)} angles, chain has {len(chain)}")
            if not satisfies_limits(chain, expr.posture):
                raise LoadError(f"expression {expr.name!r} violates chain limits")
    return out


def load_expressions(path: str, chain: KinematicChain | None = None) -> dict[str, ExpressionPosture]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise LoadError(f"cannot read expression file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"expression file {path} is not valid JSON: {exc}") from exc
    return expressions_from_dict(data, chain)


def save_expressions(expressions: dict[str, ExpressionPosture], path: str) -> None:
    with open(path, "w") as fh:
        json.dump(expressions_to_dict(expressions), fh, indent=2)
