"""Geometric IK solvers: CCD and FABRIK for point targets, plus the
limit-free posture-warping sweep (BWCD) that seeds the expressive pipeline.

All solvers are pure functions of their inputs and bit-deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .chain import (
    KinematicChain,
    Point,
    Posture,
    SEGMENT_AXIS,
    _fk_arrays,
)
from .errors import ContractViolationError
from .geometry import (
    Quat,
    Vec3,
    angle_between,
    quat_from_axis_angle,
    quat_mul,
    quat_rotate,
    vec_dot,
    vec_norm,
    vec_normalize,
    vec_scale,
    vec_sub,
    wrap_angle,
)


@dataclass(frozen=True)
class SolverSettings:
    """Stop criteria for the point-target solvers.

    tolerance is meters for position goals; max_iterations bounds full
    tip-to-root (CCD) or backward/forward (FABRIK) passes.
    """

    tolerance: float = 1e-3
    max_iterations: int = 50
    record_trace: bool = False

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ContractViolationError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ContractViolationError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class PointSolveReport:
    """Outcome of a position solve: final effector-to-target distance in
    meters, full iterations run, and the per-iteration error trace when
    requested."""

    error: float
    iterations: int
    converged: bool
    trace: tuple[float, ...] | None = None


def _require_point(target) -> Vec3:
    if not isinstance(target, Point):
        raise ContractViolationError("this solver takes a Point target")
    return target.position


def ccd_solve(
    chain: KinematicChain,
    start: Posture,
    target,
    settings: SolverSettings | None = None,
) -> tuple[Posture, PointSolveReport]:
    """Cyclic coordinate descent toward a point target, tip-to-root.

    Each joint takes its closed-form optimal hinge rotation (clamped to its
    limits), so the effector-to-target distance never increases.
    """
    settings = settings or SolverSettings()
    goal = _require_point(target)
    angles = list(start.angles)
    n = len(chain)

    positions, quats = _fk_arrays(chain, angles)
    error = vec_norm(vec_sub(positions[-1], goal))
    trace: list[float] = []
    iterations = 0
    while error > settings.tolerance and iterations < settings.max_iterations:
        iterations += 1
        for j in range(n - 1, -1, -1):
            parent_q = quats[j - 1] if j > 0 else chain.base_frame.orientation
            axis = quat_rotate(parent_q, chain.joints[j].rotation_axis)
            origin = positions[j]
            u = vec_sub(positions[-1], origin)
            v = vec_sub(goal, origin)
            ua = vec_dot(u, axis)
            va = vec_dot(v, axis)
            u_perp = (u[0] - ua * axis[0], u[1] - ua * axis[1], u[2] - ua * axis[2])
            v_perp = (v[0] - va * axis[0], v[1] - va * axis[1], v[2] - va * axis[2])
            if vec_norm(u_perp) < 1e-12 or vec_norm(v_perp) < 1e-12:
                continue
            delta = math.atan2(
                vec_dot((
                    u_perp[1] * v_perp[2] - u_perp[2] * v_perp[1],
                    u_perp[2] * v_perp[0] - u_perp[0] * v_perp[2],
                    u_perp[0] * v_perp[1] - u_perp[1] * v_perp[0],
                ), axis),
                vec_dot(u_perp, v_perp),
            )
            lo, hi = chain.joints[j].limit
            angles[j] = min(max(wrap_angle(angles[j] + delta), lo), hi)
            positions, quats = _fk_arrays(chain, angles)
        error = vec_norm(vec_sub(positions[-1], goal))
        if settings.record_trace:
            trace.append(error)

    report = PointSolveReport(
        error=error,
        iterations=iterations,
        converged=error <= settings.tolerance,
        trace=tuple(trace) if settings.record_trace else None,
    )
    return Posture(tuple(angles)), report


def _relax_points(pts, n, lengths, base_pos, goal):
    """Classic backward/forward point relaxation, in place."""
    pts[n] = goal
    for i in range(n - 1, -1, -1):
        d = vec_sub(pts[i], pts[i + 1])
        nd = vec_norm(d)
        if nd < 1e-12:
            d, nd = (1.0, 0.0, 0.0), 1.0
        pts[i] = (
            pts[i + 1][0] + d[0] / nd * lengths[i],
            pts[i + 1][1] + d[1] / nd * lengths[i],
            pts[i + 1][2] + d[2] / nd * lengths[i],
        )
    pts[0] = base_pos
    for i in range(n):
        d = vec_sub(pts[i + 1], pts[i])
        nd = vec_norm(d)
        if nd < 1e-12:
            d, nd = (1.0, 0.0, 0.0), 1.0
        pts[i + 1] = (
            pts[i][0] + d[0] / nd * lengths[i],
            pts[i][1] + d[1] / nd * lengths[i],
            pts[i][2] + d[2] / nd * lengths[i],
        )


def _extract_segment_angles(chain, angles, pts, lengths):
    """Root-to-tip: aim each segment along its relaxed point-to-point
    direction, projected onto the hinge circle and clamped. Exact when the
    relaxed points are hinge-feasible (e.g. planar chains); chasing the
    reconstruction drift instead systematically overshoots on 3D layouts."""
    prefix = chain.base_frame.orientation
    for i, joint in enumerate(chain.joints):
        axis = quat_rotate(prefix, joint.rotation_axis)
        zero_dir = quat_rotate(prefix, SEGMENT_AXIS)
        desired = vec_sub(pts[i + 1], pts[i])
        za = vec_dot(zero_dir, axis)
        da = vec_dot(desired, axis)
        z_perp = (zero_dir[0] - za * axis[0], zero_dir[1] - za * axis[1], zero_dir[2] - za * axis[2])
        d_perp = (desired[0] - da * axis[0], desired[1] - da * axis[1], desired[2] - da * axis[2])
        if vec_norm(z_perp) > 1e-12 and vec_norm(d_perp) > 1e-12:
            theta = math.atan2(
                vec_dot((
                    z_perp[1] * d_perp[2] - z_perp[2] * d_perp[1],
                    z_perp[2] * d_perp[0] - z_perp[0] * d_perp[2],
                    z_perp[0] * d_perp[1] - z_perp[1] * d_perp[0],
                ), axis),
                vec_dot(z_perp, d_perp),
            )
            lo, hi = joint.limit
            angles[i] = min(max(wrap_angle(theta), lo), hi)
        prefix = quat_mul(prefix, quat_from_axis_angle(joint.rotation_axis, angles[i]))


def _refit_to_point_cloud(chain, angles, current, pts):
    """Root-to-tip refinement: each joint takes the least-squares rotation
    about its axis that best fits all downstream relaxed points. Recovers
    aim that the per-segment pass cannot express on 3D hinge layouts."""
    n = len(chain)
    cur = list(current)
    prefix = chain.base_frame.orientation
    for i, joint in enumerate(chain.joints):
        axis = quat_rotate(prefix, joint.rotation_axis)
        o = cur[i]
        num = 0.0
        den = 0.0
        for k in range(i + 1, n + 1):
            u = vec_sub(cur[k], o)
            v = vec_sub(pts[k], o)
            ua = vec_dot(u, axis)
            va = vec_dot(v, axis)
            up = (u[0] - ua * axis[0], u[1] - ua * axis[1], u[2] - ua * axis[2])
            vp = (v[0] - va * axis[0], v[1] - va * axis[1], v[2] - va * axis[2])
            num += vec_dot((
                up[1] * vp[2] - up[2] * vp[1],
                up[2] * vp[0] - up[0] * vp[2],
                up[0] * vp[1] - up[1] * vp[0],
            ), axis)
            den += vec_dot(up, vp)
        delta = math.atan2(num, den) if (num * num + den * den) > 1e-24 else 0.0
        lo, hi = joint.limit
        new_theta = min(max(wrap_angle(angles[i] + delta), lo), hi)
        applied = new_theta - angles[i]
        angles[i] = new_theta
        q = quat_from_axis_angle(axis, applied)
        for k in range(i + 1, n + 1):
            rel = vec_sub(cur[k], o)
            rot = quat_rotate(q, rel)
            cur[k] = (o[0] + rot[0], o[1] + rot[1], o[2] + rot[2])
        prefix = quat_mul(prefix, quat_from_axis_angle(joint.rotation_axis, angles[i]))


def fabrik_solve(
    chain: KinematicChain,
    start: Posture,
    target,
    settings: SolverSettings | None = None,
) -> tuple[Posture, PointSolveReport]:
    """Backward/forward point relaxation over joint positions, then hinge
    angles re-extracted from the relaxed point geometry and clamped.

    The extraction runs per-segment first (exact for hinge-feasible point
    sets), then refits each joint to the downstream point cloud. The best
    posture seen is returned, so the reported per-iteration error is
    non-increasing.
    """
    settings = settings or SolverSettings()
    goal = _require_point(target)
    angles = list(start.angles)
    n = len(chain)
    lengths = [j.segment_length for j in chain.joints]
    base_pos = chain.base_frame.position

    positions, _ = _fk_arrays(chain, angles)
    error = vec_norm(vec_sub(positions[-1], goal))
    best_error = error
    best_angles = tuple(angles)
    trace: list[float] = []
    iterations = 0
    while best_error > settings.tolerance and iterations < settings.max_iterations:
        iterations += 1
        pts = list(positions)
        _relax_points(pts, n, lengths, base_pos, goal)
        _extract_segment_angles(chain, angles, pts, lengths)
        positions, _ = _fk_arrays(chain, angles)
        error = vec_norm(vec_sub(positions[-1], goal))
        # the cloud refit rescues 3D hinge layouts the per-segment pass
        # cannot express, but fitting an infeasible cloud can also lose
        # ground (straight-at-unreachable cases), so keep it only if it
        # actually gets the tip closer
        refit_angles = list(angles)
        _refit_to_point_cloud(chain, refit_angles, positions, pts)
        refit_positions, _ = _fk_arrays(chain, refit_angles)
        refit_error = vec_norm(vec_sub(refit_positions[-1], goal))
        if refit_error < error:
            angles = refit_angles
            positions = refit_positions
            error = refit_error
        if error < best_error:
            best_error = error
            best_angles = tuple(angles)
        if settings.record_trace:
            trace.append(best_error)

    report = PointSolveReport(
        error=best_error,
        iterations=iterations,
        converged=best_error <= settings.tolerance,
        trace=tuple(trace) if settings.record_trace else None,
    )
    return Posture(best_angles), report


# ---------------------------------------------------------------------------
# Posture-warping sweep (direction goal, run without joint limits).

def _absorption_weights(n: int) -> tuple[float, ...]:
    # joint i of N absorbs 1/(N - i) of the remaining alignment rotation
    # (0-based), so the tip absorbs whatever is left.
    return tuple(1.0 / (n - i) for i in range(n))


def distribution_sweep(
    chain: KinematicChain,
    angles: list[float],
    target_direction: Vec3,
    *,
    enforce_limits: bool,
    weights: tuple[float, ...] | None = None,
) -> float:
    """One root-to-tip aiming pass: each joint absorbs a share of its own
    optimal hinge rotation (the closed-form angle that best aligns the gaze
    with the target about that axis). Mutates `angles`; returns the angle
    error after the pass.

    The per-joint closed form projects both directions off the joint axis,
    which stays well-conditioned when the gaze passes near a joint's pole
    (where projecting a single global alignment rotation onto the axes
    stalls).
    """
    n = len(chain)
    weights = weights or _absorption_weights(n)
    eff_axis = chain.effector_axis
    tx, ty, tz = target_direction

    # suffix[i] = product of local joint rotations i..N-1 at current angles
    suffix: list[Quat] = [(1.0, 0.0, 0.0, 0.0)] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = quat_mul(quat_from_axis_angle(chain.joints[i].rotation_axis, angles[i]), suffix[i + 1])

    prefix = chain.base_frame.orientation
    gaze = quat_rotate(quat_mul(prefix, suffix[0]), eff_axis)
    for i, joint in enumerate(chain.joints):
        ux, uy, uz = quat_rotate(prefix, joint.rotation_axis)
        gx, gy, gz = gaze
        ga = gx * ux + gy * uy + gz * uz
        ta = tx * ux + ty * uy + tz * uz
        gpx, gpy, gpz = gx - ga * ux, gy - ga * uy, gz - ga * uz
        tpx, tpy, tpz = tx - ta * ux, ty - ta * uy, tz - ta * uz
        cross_u = (
            (gpy * tpz - gpz * tpy) * ux
            + (gpz * tpx - gpx * tpz) * uy
            + (gpx * tpy - gpy * tpx) * uz
        )
        dot_p = gpx * tpx + gpy * tpy + gpz * tpz
        if cross_u * cross_u + dot_p * dot_p > 1e-24:
            delta = weights[i] * math.atan2(cross_u, dot_p)
        else:
            delta = 0.0  # gaze or target sits on this joint's axis: no leverage
        theta = wrap_angle(angles[i] + delta)
        if enforce_limits:
            lo, hi = joint.limit
            theta = min(max(theta, lo), hi)
        angles[i] = theta
        prefix = quat_mul(prefix, quat_from_axis_angle(joint.rotation_axis, theta))
        gaze = quat_rotate(quat_mul(prefix, suffix[i + 1]), eff_axis)
    return angle_between(gaze, target_direction)


def bwcd_warp(
    chain: KinematicChain,
    expression: Posture,
    target_direction: Vec3,
    *,
    tolerance: float = 1e-3,
    max_sweeps: int = 60,
) -> Posture:
    """Warp a posture so its end point aims at target_direction, without
    enforcing joint limits.

    Root-to-tip sweeps distribute the remaining alignment rotation across
    the joints (weighted so deeper joints absorb more), which preserves the
    input posture's shape instead of dumping the whole rotation into one
    joint. Returns the input unchanged when it already aims within
    tolerance.
    """
    if len(expression) != len(chain):
        raise ContractViolationError("posture length does not match chain")
    target = vec_normalize(target_direction)
    angles = list(expression.angles)
    _, quats = _fk_arrays(chain, angles)
    error = angle_between(quat_rotate(quats[-1], chain.effector_axis), target)
    if error < tolerance:
        return expression
    weights = _absorption_weights(len(chain))
    for _ in range(max_sweeps):
        error = distribution_sweep(chain, angles, target, enforce_limits=False, weights=weights)
        if error < tolerance:
            break
    return Posture(tuple(angles))
