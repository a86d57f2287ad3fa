"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL
line (run with -s to see them inline). Tolerances are pinned here, not
configurable."""

import math
import random
import statistics
import time

import numpy as np
import pytest

from avantsatie.chain import (
    Direction,
    JointSpec,
    KinematicChain,
    Point,
    Posture,
    angle_error_to_target,
    posture_distance,
    satisfies_limits,
)
from avantsatie.defaults import default_chain, default_composition, default_expressions
from avantsatie.ebps import (
    PITCH_KNOTS_DEG,
    YAW_KNOTS_DEG,
    build_grid_from_erik,
    direction_from_yaw_pitch,
    ebps_synthesize,
)
from avantsatie.erik import ErikSettings, ExpressionPosture, FilterSettings, erik_solve, solve_stream
from avantsatie.game import Condition, metrics
from avantsatie.session import KeyPress, SessionConfig, SessionEngine, replay_session_log, resolve_config
from avantsatie.simulation import (
    HintFollowingPolicy,
    default_stack,
    episode_seed,
    rank_sum_test,
    run_episode,
    run_experiment,
)
from avantsatie.solvers import SolverSettings, ccd_solve, fabrik_solve

TOLERANCE_1DEG = math.radians(1.0)


def report(number: int, description: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {number:02d} {status} - {description}{suffix}")


@pytest.fixture(scope="module")
def chain():
    return default_chain()


@pytest.fixture(scope="module")
def expressions(chain):
    return default_expressions(chain)


@pytest.fixture(scope="module")
def stack():
    return default_stack()


_sweep_record = {"violations": None, "worst_error": None}


def test_criterion_01_envelope_convergence(chain, expressions):
    """Every 1-degree envelope cell converges below 1 degree, within 60 s."""
    t0 = time.perf_counter()
    settings = ErikSettings()
    worst = 0.0
    failures = 0
    violations = 0
    for expr in expressions.values():
        for yaw in range(-70, 71):
            for pitch in range(0, 81):
                target = Direction(direction_from_yaw_pitch(float(yaw), float(pitch)))
                posture, rep = erik_solve(chain, expr, target, settings)
                if not (rep.converged and rep.angle_error < TOLERANCE_1DEG):
                    failures += 1
                if not satisfies_limits(chain, posture):
                    violations += 1
                if rep.angle_error > worst:
                    worst = rep.angle_error
    elapsed = time.perf_counter() - t0
    _sweep_record["violations"] = violations
    _sweep_record["worst_error"] = worst
    passed = failures == 0 and elapsed < 60.0
    report(1, "envelope convergence at 1-degree steps", passed,
           f"34263 solves, worst {math.degrees(worst):.3f} deg, {elapsed:.1f}s")
    assert failures == 0
    assert elapsed < 60.0


def test_criterion_02_identity_invariance(chain, expressions):
    """Solving toward the native direction returns the authored posture."""
    worst = 0.0
    for expr in expressions.values():
        posture, _ = erik_solve(chain, expr, Direction(expr.native_direction))
        for got, authored in zip(posture.angles, expr.posture.angles):
            worst = max(worst, abs(got - authored))
    passed = worst < 1e-6
    report(2, "identity invariance for all three expressions", passed, f"worst drift {worst:.2e} rad")
    assert passed


def test_criterion_03_limits_always_hold(chain, expressions):
    """No limit violations in the dense sweep (criterion 1) nor across a
    solved-and-filtered stream with expression switches."""
    assert _sweep_record["violations"] is not None, "criterion 1 must run first"
    violations = _sweep_record["violations"]

    settings = ErikSettings()
    dt = 1 / 30
    n = 3000
    exprs = []
    targets = []
    names = list(expressions)
    for i in range(n):
        exprs.append(expressions[names[(i // 150) % 3]])
        yaw = -70.0 + (i % 600) * 140.0 / 599.0
        pitch = 40.0 + 40.0 * math.sin(i / 77.0)
        targets.append(Direction(direction_from_yaw_pitch(yaw, pitch)))
    for posture, _ in solve_stream(chain, exprs, targets, dt, settings):
        if not satisfies_limits(chain, posture):
            violations += 1
    passed = violations == 0
    report(3, "joint limits hold across sweep and stream", passed, f"{violations} violations")
    assert passed


def test_criterion_04_grid_knot_exactness(chain, expressions):
    """Grids hold 15 x 2 knots per expression and synthesis reproduces every
    stored posture exactly."""
    grids = {name: build_grid_from_erik(chain, expr) for name, expr in expressions.items()}
    counts_ok = all(
        len(g.yaw_knots_deg) == 15 and len(g.pitch_knots_deg) == 2 and g.knot_count == 30
        for g in grids.values()
    )
    exact = True
    for grid in grids.values():
        for i, yaw in enumerate(grid.yaw_knots_deg):
            for j, pitch in enumerate(grid.pitch_knots_deg):
                out = ebps_synthesize(grid, yaw, pitch)
                if posture_distance(out, grid.postures[i][j]) != 0.0:
                    exact = False
    passed = counts_ok and exact
    report(4, "grid knot counts and synthesis exactness", passed,
           f"{sum(g.knot_count for g in grids.values())} knots")
    assert passed


def test_criterion_05_filter_continuity(chain, expressions):
    """10 000 ticks of 60-degree step targets at 30 Hz never exceed the
    per-tick velocity cap."""
    dt = 1 / 30
    settings = ErikSettings()
    cap_step = settings.filter.max_velocity_rad_s * dt
    ticks = 10_000
    exprs = [expressions["warm"]] * ticks
    targets = []
    for i in range(ticks):
        yaw = -30.0 if (i // 60) % 2 == 0 else 30.0  # 60-degree step every 2 s
        targets.append(Direction(direction_from_yaw_pitch(yaw, 20.0)))
    worst = 0.0
    violations = 0
    prev = None
    for posture, _ in solve_stream(chain, exprs, targets, dt, settings):
        if not satisfies_limits(chain, posture):
            violations += 1
        if prev is not None:
            step = max(abs(a - b) for a, b in zip(posture.angles, prev.angles))
            worst = max(worst, step)
        prev = posture
    passed = worst <= cap_step + 1e-12 and violations == 0
    report(5, "filter continuity across 10000 step-target ticks", passed,
           f"worst step {worst:.5f} rad vs cap {cap_step:.5f}")
    assert passed


# --- criterion 6 oracle -------------------------------------------------

def _two_joint_chain():
    lim = (math.radians(-100.0), math.radians(100.0))
    return KinematicChain(joints=(
        JointSpec(rotation_axis=(0, 0, 1), segment_length=0.06, limit=lim),
        JointSpec(rotation_axis=(0, 1, 0), segment_length=0.06, limit=lim),
    ))


def _gaze_grid(t1, t2):
    # closed form for the (z, y) two-joint chain, independent of the package
    c1, s1 = np.cos(t1), np.sin(t1)
    c2, s2 = np.cos(t2), np.sin(t2)
    return np.stack([c1 * c2, s1 * c2, -s2], axis=-1)


def _positions_grid(t1, t2, length=0.06):
    c1, s1 = np.cos(t1), np.sin(t1)
    c2, s2 = np.cos(t2), np.sin(t2)
    px = length * c1 * (1.0 + c2)
    py = length * s1 * (1.0 + c2)
    pz = -length * s2
    return np.stack([px, py, pz], axis=-1)


def _angle_to(vectors, direction):
    dots = np.clip(vectors @ np.asarray(direction), -1.0, 1.0)
    return np.arccos(dots)


def _grid_min_gaze_error(direction, point=None, rounds=4, res=181):
    """Dense multiscale grid search over both joint angles for the minimum
    achievable gaze error (toward a fixed direction, or toward a point
    measured from the moving effector)."""
    lo = math.radians(-100.0)
    hi = math.radians(100.0)
    b1 = [lo, hi]
    b2 = [lo, hi]
    best = None
    for _ in range(rounds):
        t1 = np.linspace(b1[0], b1[1], res)
        t2 = np.linspace(b2[0], b2[1], res)
        T1, T2 = np.meshgrid(t1, t2, indexing="ij")
        gaze = _gaze_grid(T1, T2)
        if point is None:
            err = _angle_to(gaze.reshape(-1, 3), direction).reshape(T1.shape)
        else:
            pos = _positions_grid(T1, T2)
            rel = np.asarray(point) - pos
            rel = rel / np.linalg.norm(rel, axis=-1, keepdims=True)
            dots = np.clip(np.einsum("ijk,ijk->ij", gaze, rel), -1.0, 1.0)
            err = np.arccos(dots)
        idx = np.unravel_index(np.argmin(err), err.shape)
        best = float(err[idx])
        c1, c2 = float(T1[idx]), float(T2[idx])
        span1 = (b1[1] - b1[0]) / (res - 1) * 2
        span2 = (b2[1] - b2[0]) / (res - 1) * 2
        b1 = [max(lo, c1 - span1), min(hi, c1 + span1)]
        b2 = [max(lo, c2 - span2), min(hi, c2 + span2)]
    return best


def test_criterion_06_oracle_equivalence():
    """On a 2-joint chain, every solver's final gaze error must sit within
    1e-3 rad of the dense grid-search optimum, for 100 seeded targets."""
    chain = _two_joint_chain()
    rng = random.Random(2024)
    neutral = ExpressionPosture(name="neutral", posture=Posture((0.0, 0.0)),
                                native_direction=(1.0, 0.0, 0.0))
    erik_settings = ErikSettings(tolerance=5e-4, max_iterations=200, warp_tolerance=2.5e-4,
                                 warp_max_sweeps=200)
    point_settings = SolverSettings(tolerance=1e-4, max_iterations=120)
    far = 1000.0
    worst = {"ccd": 0.0, "fabrik": 0.0, "erik": 0.0}
    for _ in range(100):
        th1 = rng.uniform(-1.5, 1.5)
        th2 = rng.uniform(-1.5, 1.5)
        d = (math.cos(th1) * math.cos(th2), math.sin(th1) * math.cos(th2), -math.sin(th2))
        far_point = Point((d[0] * far, d[1] * far, d[2] * far))

        grid_dir = _grid_min_gaze_error(d)
        grid_point = _grid_min_gaze_error(d, point=far_point.position)

        sol, _ = ccd_solve(chain, Posture((0.0, 0.0)), far_point, point_settings)
        worst["ccd"] = max(worst["ccd"], abs(angle_error_to_target(chain, sol, far_point) - grid_point))

        sol, _ = fabrik_solve(chain, Posture((0.0, 0.0)), far_point, point_settings)
        worst["fabrik"] = max(worst["fabrik"], abs(angle_error_to_target(chain, sol, far_point) - grid_point))

        sol, _ = erik_solve(chain, neutral, Direction(d), erik_settings)
        worst["erik"] = max(worst["erik"], abs(angle_error_to_target(chain, sol, Direction(d)) - grid_dir))

    passed = all(v < 1e-3 for v in worst.values())
    report(6, "solver gaze errors match grid-search optima", passed,
           ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))
    assert passed, worst


_experiment_cache = {}


def _h_experiment(stack):
    if "result" not in _experiment_cache:
        t0 = time.perf_counter()
        _experiment_cache["result"] = run_experiment(
            conditions=[Condition.CONTROL, Condition.ERIK, Condition.EBPS],
            policies=["random", "hint", "hint"],
            episodes_per_cell=19,
            seed=7,
            stack=stack,
        )
        _experiment_cache["elapsed"] = time.perf_counter() - t0
    return _experiment_cache["result"], _experiment_cache["elapsed"]


def test_criterion_07_h1_directional(stack):
    """19 episodes per cell: the control cell makes significantly more wrong
    guesses than either expressive cell, within the runtime budget."""
    result, elapsed = _h_experiment(stack)
    by_cell = {(c.condition, c.policy): c for c in result.cells}
    control = by_cell[(Condition.CONTROL, "random")]
    erik = by_cell[(Condition.ERIK, "hint")]
    ebps = by_cell[(Condition.EBPS, "hint")]
    wrong = lambda cell: cell.means["wrong_total"]

    control_values = [e.metrics["wrong_total"] for e in result.episodes if e.condition is Condition.CONTROL]
    erik_values = [e.metrics["wrong_total"] for e in result.episodes if e.condition is Condition.ERIK]
    ebps_values = [e.metrics["wrong_total"] for e in result.episodes if e.condition is Condition.EBPS]
    p_erik = rank_sum_test(control_values, erik_values).p_value
    p_ebps = rank_sum_test(control_values, ebps_values).p_value

    passed = (
        wrong(control) > wrong(erik)
        and wrong(control) > wrong(ebps)
        and p_erik < 0.05
        and p_ebps < 0.05
        and elapsed < 30.0
    )
    report(7, "H1: control cell makes more mistakes", passed,
           f"means {wrong(control):.0f} vs {wrong(erik):.0f}/{wrong(ebps):.0f}, "
           f"p {p_erik:.4f}/{p_ebps:.4f}, {elapsed:.1f}s")
    assert passed


def test_criterion_08_h2_directional(stack):
    """The two expressive implementations are statistically indistinguishable
    on wrong guesses at this scale."""
    result, _ = _h_experiment(stack)
    erik_values = [e.metrics["wrong_total"] for e in result.episodes if e.condition is Condition.ERIK]
    ebps_values = [e.metrics["wrong_total"] for e in result.episodes if e.condition is Condition.EBPS]
    p = rank_sum_test(erik_values, ebps_values).p_value
    passed = p > 0.05
    report(8, "H2: expressive implementations indistinguishable", passed, f"p {p:.4f}")
    assert passed


def test_criterion_09_legibility_loop(stack):
    """The nearest-expression classifier recovers the commanded expression on
    at least 99% of post-settling ticks in both expressive conditions."""
    rates = {}
    for condition in (Condition.ERIK, Condition.EBPS):
        result = run_episode(
            condition, HintFollowingPolicy(attention_noise=0.1),
            stack=stack, seed=episode_seed(7, 0),
        )
        rates[condition.value] = result.legibility_rate
    passed = all(rate >= 0.99 for rate in rates.values())
    report(9, "legibility of the streamed postures", passed,
           ", ".join(f"{k} {v:.4f}" for k, v in rates.items()))
    assert passed


def test_criterion_10_replay_determinism(tmp_path):
    """100 random sessions round-trip through their JSONL logs to identical
    final metrics."""
    mismatches = 0
    for seed in range(100):
        rng = random.Random(seed)
        path = tmp_path / f"s{seed}.jsonl"
        with open(path, "w") as fh:
            engine = SessionEngine(resolve_config(SessionConfig(seed=seed)), log_stream=fh)
            while not engine.done and engine.tick_index < 30_000:
                engine.submit(KeyPress(rng.randrange(13)))
                engine.tick()
            final_metrics = metrics(engine.state).to_dict()
            finished = engine.done
        assert finished, f"seed {seed} did not finish"
        state, comparison = replay_session_log(str(path))
        if comparison["replayed"] != final_metrics or comparison["replayed"] != comparison["logged"]:
            mismatches += 1
    passed = mismatches == 0
    report(10, "replay determinism over 100 random sessions", passed, f"{mismatches} mismatches")
    assert passed


def test_criterion_11_realtime_budget(chain, expressions):
    """A solve_stream tick on the default chain takes under 2 ms median,
    measured against continuously moving targets (no memoization wins)."""
    dt = 1 / 30
    n = 600
    targets = [
        Direction(direction_from_yaw_pitch(-60.0 + 120.0 * i / n, 10.0 + 60.0 * i / n))
        for i in range(n)
    ]
    exprs = [expressions["cold" if i % 2 else "warm"] for i in range(n)]
    gen = solve_stream(chain, exprs, targets, dt, ErikSettings())
    times = []
    while True:
        t0 = time.perf_counter()
        try:
            next(gen)
        except StopIteration:
            break
        times.append(time.perf_counter() - t0)
    median_ms = statistics.median(times) * 1e3
    passed = median_ms < 2.0
    report(11, "real-time budget per stream tick", passed, f"median {median_ms:.3f} ms")
    assert passed
