"""Headless experiment runner: scripted player policies close the loop
against the full stack (game + gaze + solver stream) and reproduce the
objective-measure contrasts directionally at desk scale.

Policies never read game internals: they see the screen state (phase,
progress, cued key) and the robot's posture stream classified back to an
expression label, exactly the channels a human player has.
"""

from __future__ import annotations

import csv
import math
import random
import statistics
from dataclasses import dataclass

from .chain import KinematicChain, Posture, effector_gaze_direction, posture_distance
from .defaults import default_composition, default_expressions, default_chain, default_layout, face_position_for_key
from .ebps import PostureGrid, build_grid_from_erik, ebps_synthesize, yaw_pitch_from_direction
from .erik import ExpressionPosture, NEUTRAL
from .errors import ContractViolationError, RunawayEpisodeError
from .game import Composition, Condition, Keyboard, metrics
from .gaze import SceneLayout
from .session import FacePosition, KeyPress, ResolvedSession, SessionEngine, SessionInput

GUESS_CADENCE_RANDOM_S = 0.6   # trial-and-error players hammer keys quickly
GUESS_CADENCE_HINT_S = 1.5     # hint-followers pause to inspect the robot
REPLAY_CADENCE_S = 0.6         # reward phases are paced the same for everyone
SETTLE_WINDOW_S = 0.5          # posture classification ignores this window
                               # after any expression change or face move


@dataclass(frozen=True)
class Observation:
    """What a player can see on one tick."""

    t: float
    phase_kind: str
    progress: tuple
    highlight: int | None
    expression: str


class PlayerPolicy:
    """Base: presses keys at a fixed cadence, walking onto each key first."""

    name = "base"
    cadence_s = GUESS_CADENCE_RANDOM_S

    def reset(self, keyboard: Keyboard, layout: SceneLayout, seed: int) -> None:
        self.keyboard = keyboard
        self.layout = layout
        self.rng = random.Random(seed)
        self.next_action_t = 0.0
        self.last_progress: tuple | None = None
        self.last_guess: int | None = None
        self.guess_history: list[int] = []

    def act(self, obs: Observation) -> list[SessionInput]:
        if obs.phase_kind == "done" or obs.t < self.next_action_t:
            return []
        if obs.phase_kind == "guessing":
            self.next_action_t = obs.t + self.cadence_s
        else:
            self.next_action_t = obs.t + REPLAY_CADENCE_S
        key = self.choose_key(obs)
        if key is None:
            return []
        return [FacePosition(*face_position_for_key(self.layout, key)), KeyPress(key)]

    def choose_key(self, obs: Observation) -> int | None:
        start_key = 2  # the D icon on the start screen names this key
        if obs.phase_kind in ("start", "instructions"):
            return start_key
        if obs.phase_kind in ("replay", "full_replay"):
            return obs.highlight
        if obs.phase_kind == "guessing":
            if obs.progress != self.last_progress:
                self.begin_note()
                self.last_progress = obs.progress
            else:
                self.feedback(obs)
            guess = self.next_guess(obs)
            self.last_guess = guess
            self.guess_history.append(guess)
            return guess
        return None

    # hooks -----------------------------------------------------------------
    def begin_note(self) -> None:
        raise NotImplementedError

    def feedback(self, obs: Observation) -> None:
        pass

    def next_guess(self, obs: Observation) -> int:
        raise NotImplementedError


class ScriptedPolicy(PlayerPolicy):
    """Presses a fixed key sequence, one key per action tick."""

    name = "scripted"
    cadence_s = GUESS_CADENCE_RANDOM_S

    def __init__(self, keys):
        self.keys = list(keys)

    def reset(self, keyboard, layout, seed):
        super().reset(keyboard, layout, seed)
        self._cursor = 0

    def choose_key(self, obs):
        if self._cursor >= len(self.keys):
            return None
        key = self.keys[self._cursor]
        self._cursor += 1
        return key


class RandomTrialErrorPolicy(PlayerPolicy):
    """Uniform trial and error: a fresh random permutation of all keys per
    note, pressed without replacement until the note falls."""

    name = "random"
    cadence_s = GUESS_CADENCE_RANDOM_S

    def begin_note(self):
        self.order = list(range(self.keyboard.count))
        self.rng.shuffle(self.order)
        self.cursor = 0

    def next_guess(self, obs):
        key = self.order[self.cursor % len(self.order)]
        self.cursor += 1
        return key


class FallbackScanPolicy(PlayerPolicy):
    """Median-of-candidates scan that never reads the robot: the reference
    behavior a hint-follower degenerates to when no hints arrive."""

    name = "fallback-scan"
    cadence_s = GUESS_CADENCE_HINT_S

    def begin_note(self):
        self.candidates = list(range(self.keyboard.count))

    def feedback(self, obs):
        if self.last_guess in self.candidates:
            self.candidates.remove(self.last_guess)
        if not self.candidates:
            self.candidates = list(range(self.keyboard.count))

    def next_guess(self, obs):
        return self.candidates[len(self.candidates) // 2]


class HintFollowingPolicy(PlayerPolicy):
    """Median-of-candidates search driven by the robot's posture: warm keeps
    the ball around the last guess, cold removes it. attention_noise is the
    probability of missing the robot's response for one guess."""

    name = "hint"
    cadence_s = GUESS_CADENCE_HINT_S

    def __init__(self, hot_radius_belief: int = 2, attention_noise: float = 0.0):
        if not 0.0 <= attention_noise <= 1.0:
            raise ContractViolationError("attention_noise must lie in [0, 1]")
        self.hot_radius_belief = hot_radius_belief
        self.attention_noise = attention_noise

    def begin_note(self):
        self.candidates = list(range(self.keyboard.count))

    def feedback(self, obs):
        last = self.last_guess
        if last is None:
            return
        noticed = self.attention_noise == 0.0 or self.rng.random() >= self.attention_noise
        r = self.hot_radius_belief
        if noticed and obs.expression == "warm":
            self.candidates = [c for c in self.candidates if abs(c - last) <= r and c != last]
        elif noticed and obs.expression == "cold":
            self.candidates = [c for c in self.candidates if abs(c - last) > r]
        else:
            self.candidates = [c for c in self.candidates if c != last]
        if not self.candidates:
            self.candidates = [c for c in range(self.keyboard.count) if c != last]

    def next_guess(self, obs):
        return self.candidates[len(self.candidates) // 2]


def make_policy(name: str, condition: Condition) -> PlayerPolicy:
    if name == "auto":
        name = "random" if condition is Condition.CONTROL else "hint"
    if name == "random":
        return RandomTrialErrorPolicy()
    if name == "hint":
        return HintFollowingPolicy(attention_noise=0.1)
    if name == "fallback-scan":
        return FallbackScanPolicy()
    raise ContractViolationError(f"unknown policy {name!r}")


# ---------------------------------------------------------------------------
# Posture-stream classifier

class ExpressionClassifier:
    """Nearest-expression matching: read the gaze direction off the observed
    posture, synthesize each expression's posture for that direction, pick
    the closest. This is the only robot channel policies get."""

    def __init__(self, chain: KinematicChain, grids: dict[str, PostureGrid]):
        self.chain = chain
        self.grids = grids

    def classify(self, posture: Posture) -> str:
        yaw, pitch = yaw_pitch_from_direction(effector_gaze_direction(self.chain, posture))
        best_name = NEUTRAL
        best_dist = math.inf
        for name, grid in self.grids.items():
            d = posture_distance(posture, ebps_synthesize(grid, yaw, pitch))
            if d < best_dist:
                best_name, best_dist = name, d
        return best_name


# ---------------------------------------------------------------------------
# Stack shared across episodes (grids are expensive to build)

@dataclass(frozen=True)
class SimulationStack:
    chain: KinematicChain
    expressions: dict[str, ExpressionPosture]
    grids: dict[str, PostureGrid]
    layout: SceneLayout
    classifier: ExpressionClassifier


_DEFAULT_STACK: SimulationStack | None = None


def default_stack() -> SimulationStack:
    global _DEFAULT_STACK
    if _DEFAULT_STACK is None:
        chain = default_chain()
        expressions = default_expressions(chain)
        grids = {name: build_grid_from_erik(chain, expr) for name, expr in expressions.items()}
        _DEFAULT_STACK = SimulationStack(
            chain=chain,
            expressions=expressions,
            grids=grids,
            layout=default_layout(),
            classifier=ExpressionClassifier(chain, grids),
        )
    return _DEFAULT_STACK


# ---------------------------------------------------------------------------
# Episodes

@dataclass(frozen=True)
class EpisodeResult:
    condition: Condition
    policy: str
    seed: int
    metrics: dict
    per_note_wrong: dict[tuple[int, int, int], int]
    legibility_ticks: int
    legibility_correct: int
    ticks: int

    @property
    def legibility_rate(self) -> float:
        return self.legibility_correct / self.legibility_ticks if self.legibility_ticks else 1.0


def run_episode(
    condition: Condition,
    policy: PlayerPolicy,
    composition: Composition | None = None,
    dt: float = 0.1,
    seed: int = 0,
    stack: SimulationStack | None = None,
    max_ticks: int = 50_000,
) -> EpisodeResult:
    """Closed loop at fixed dt until the game completes.

    The policy observes the served frame plus the classified posture stream
    and queues inputs for the next tick. Episodes that outlive max_ticks
    raise RunawayEpisodeError.
    """
    stack = stack or default_stack()
    composition = composition or default_composition()
    resolved = ResolvedSession(
        condition=condition,
        chain=stack.chain,
        expressions=stack.expressions,
        grids=stack.grids,
        composition=composition,
        layout=stack.layout,
        tick_rate_hz=1.0 / dt,
        seed=seed,
    )
    engine = SessionEngine(resolved)
    policy.reset(composition.keyboard, stack.layout, seed)

    settle_until = SETTLE_WINDOW_S
    legibility_ticks = 0
    legibility_correct = 0

    for _ in range(max_ticks):
        frame, events = engine.tick()
        disturbed = any(e["kind"] == "expression_change" for e in frame.events)
        classified = stack.classifier.classify(engine.filtered_posture())
        if frame.t >= settle_until:
            legibility_ticks += 1
            if classified == frame.expression:
                legibility_correct += 1
        obs = Observation(
            t=frame.t,
            phase_kind=frame.phase["kind"],
            progress=tuple(sorted(frame.phase.items())),
            highlight=frame.highlight,
            expression=classified,
        )
        inputs = policy.act(obs)
        for inp in inputs:
            engine.submit(inp)
        if disturbed or any(isinstance(i, FacePosition) for i in inputs):
            settle_until = frame.t + SETTLE_WINDOW_S
        if engine.done:
            break
    else:
        raise RunawayEpisodeError(f"episode still in {frame.phase['kind']} after {max_ticks} ticks")

    per_note: dict[tuple[int, int, int], int] = {}
    for record in engine.state.guess_log:
        if not record.correct:
            key = (record.level, record.part, record.note)
            per_note[key] = per_note.get(key, 0) + 1
    return EpisodeResult(
        condition=condition,
        policy=policy.name,
        seed=seed,
        metrics=metrics(engine.state).to_dict(),
        per_note_wrong=per_note,
        legibility_ticks=legibility_ticks,
        legibility_correct=legibility_correct,
        ticks=engine.tick_index,
    )


# ---------------------------------------------------------------------------
# Rank-sum comparison (fixed nonparametric two-sample test)

@dataclass(frozen=True)
class RankSumResult:
    u: float
    z: float
    p_value: float  # two-sided, normal approximation with tie correction
    mean_a: float
    mean_b: float


def rank_sum_test(xs, ys) -> RankSumResult:
    """Two-sample rank-sum comparison with average ranks for ties, tie-
    corrected variance, continuity correction, and a two-sided normal-
    approximation p-value. Zero-variance pooled samples report p = 1."""
    n1, n2 = len(xs), len(ys)
    if n1 == 0 or n2 == 0:
        raise ContractViolationError("rank-sum needs non-empty samples")
    combined = sorted([(float(v), 0) for v in xs] + [(float(v), 1) for v in ys])
    n = n1 + n2
    ranks = [0.0] * n
    tie_term = 0.0
    i = 0
    while i < n:
        j = i
        while j < n and combined[j][0] == combined[i][0]:
            j += 1
        avg_rank = (i + j + 1) / 2.0  # 1-based positions i+1..j
        for k in range(i, j):
            ranks[k] = avg_rank
        t = j - i
        tie_term += t ** 3 - t
        i = j
    r1 = sum(rank for rank, (_, g) in zip(ranks, combined) if g == 0)
    u1 = r1 - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0
    sigma2 = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    mean_a = sum(xs) / n1
    mean_b = sum(ys) / n2
    if sigma2 <= 0.0:
        return RankSumResult(u=u1, z=0.0, p_value=1.0, mean_a=mean_a, mean_b=mean_b)
    diff = u1 - mu
    if diff > 0.5:
        diff -= 0.5
    elif diff < -0.5:
        diff += 0.5
    else:
        diff = 0.0
    z = diff / math.sqrt(sigma2)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return RankSumResult(u=u1, z=z, p_value=p, mean_a=mean_a, mean_b=mean_b)


# ---------------------------------------------------------------------------
# Experiments

@dataclass(frozen=True)
class CellSummary:
    condition: Condition
    policy: str
    means: dict
    stdevs: dict


@dataclass(frozen=True)
class PairComparison:
    cell_a: tuple[str, str]
    cell_b: tuple[str, str]
    metric: str
    result: RankSumResult


@dataclass(frozen=True)
class ExperimentResult:
    episodes: list[EpisodeResult]
    cells: list[CellSummary]
    comparisons: list[PairComparison]


METRIC_KEYS = ("time_s", "wrong_hot", "wrong_cold", "wrong_total")


def episode_seed(base_seed: int, index: int) -> int:
    # shared across cells (common random numbers), distinct per episode
    return base_seed * 1_000_003 + index * 9_176 + 13


def run_experiment(
    conditions,
    policies="auto",
    episodes_per_cell: int = 19,
    seed: int = 7,
    composition: Composition | None = None,
    dt: float = 0.1,
    stack: SimulationStack | None = None,
) -> ExperimentResult:
    """Between-cells experiment: episodes_per_cell seeded episodes for each
    (condition, policy) cell, per-cell means/dispersions, and pairwise
    rank-sum comparisons of every metric. Deterministic given seed."""
    if episodes_per_cell < 1:
        raise ContractViolationError("episodes_per_cell must be >= 1")
    stack = stack or default_stack()
    composition = composition or default_composition()
    if isinstance(policies, str):
        policies = [policies] * len(conditions)
    if len(policies) != len(conditions):
        raise ContractViolationError("conditions and policies must pair up")

    episodes: list[EpisodeResult] = []
    cells: list[CellSummary] = []
    per_cell_values: dict[tuple[str, str], dict[str, list[float]]] = {}
    for condition, policy_name in zip(conditions, policies):
        condition = Condition(condition)
        cell_episodes = []
        for i in range(episodes_per_cell):
            policy = make_policy(policy_name, condition)
            result = run_episode(
                condition, policy, composition=composition, dt=dt,
                seed=episode_seed(seed, i), stack=stack,
            )
            cell_episodes.append(result)
        episodes.extend(cell_episodes)
        values = {
            key: [e.metrics[key] for e in cell_episodes]
            for key in METRIC_KEYS
        }
        per_cell_values[(condition.value, cell_episodes[0].policy)] = values
        cells.append(CellSummary(
            condition=condition,
            policy=cell_episodes[0].policy,
            means={k: statistics.fmean(v) for k, v in values.items()},
            stdevs={k: (statistics.stdev(v) if len(v) > 1 else 0.0) for k, v in values.items()},
        ))

    comparisons = []
    cell_keys = list(per_cell_values)
    for a in range(len(cell_keys)):
        for b in range(a + 1, len(cell_keys)):
            for metric in METRIC_KEYS:
                comparisons.append(PairComparison(
                    cell_a=cell_keys[a],
                    cell_b=cell_keys[b],
                    metric=metric,
                    result=rank_sum_test(
                        per_cell_values[cell_keys[a]][metric],
                        per_cell_values[cell_keys[b]][metric],
                    ),
                ))
    return ExperimentResult(episodes=episodes, cells=cells, comparisons=comparisons)


# ---------------------------------------------------------------------------
# Result tables

RESULTS_COLUMNS = ("condition", "policy", "seed", "time_s", "wrong_hot", "wrong_cold", "wrong_total")


def write_results_csv(result: ExperimentResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_COLUMNS)
        for e in result.episodes:
            writer.writerow([
                e.condition.value, e.policy, e.seed,
                f"{e.metrics['time_s']:.3f}", e.metrics["wrong_hot"],
                e.metrics["wrong_cold"], e.metrics["wrong_total"],
            ])


def write_summary_csv(result: ExperimentResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["record", "condition_a", "policy_a", "condition_b", "policy_b", "metric", "value_a", "value_b", "p_value"])
        for cell in result.cells:
            for metric in METRIC_KEYS:
                writer.writerow([
                    "cell", cell.condition.value, cell.policy, "", "", metric,
                    f"{cell.means[metric]:.4f}", f"{cell.stdevs[metric]:.4f}", "",
                ])
        for comp in result.comparisons:
            writer.writerow([
                "test", comp.cell_a[0], comp.cell_a[1], comp.cell_b[0], comp.cell_b[1],
                comp.metric, f"{comp.result.mean_a:.4f}", f"{comp.result.mean_b:.4f}",
                f"{comp.result.p_value:.6f}",
            ])


def summary_text(result: ExperimentResult) -> str:
    lines = []
    header = f"{'cell':<28}" + "".join(f"{k:>14}" for k in METRIC_KEYS)
    lines.append(header)
    for cell in result.cells:
        label = f"{cell.condition.value}/{cell.policy}"
        means = "".join(f"{cell.means[k]:>14.2f}" for k in METRIC_KEYS)
        lines.append(f"{label:<28}{means}")
        stds = "".join(f"{cell.stdevs[k]:>14.2f}" for k in METRIC_KEYS)
        lines.append(f"{'  (std)':<28}{stds}")
    lines.append("")
    lines.append(f"{'comparison (rank-sum)':<44}{'metric':>12}{'p':>12}")
    for comp in result.comparisons:
        label = f"{comp.cell_a[0]}/{comp.cell_a[1]} vs {comp.cell_b[0]}/{comp.cell_b[1]}"
        lines.append(f"{label:<44}{comp.metric:>12}{comp.result.p_value:>12.4f}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Helpers for tests and scripted play

def perfect_key_sequence(composition: Composition, instruction_pages: int = 2, start_key: int = 2) -> list[int]:
    """The exact key presses that complete the game with zero wrong guesses."""
    keys = [start_key] * (1 + instruction_pages)
    for level in composition.levels:
        for part in level.parts:
            keys.extend(part)      # guessing
            keys.extend(part)      # part replay
        keys.extend(level.flattened())  # full replay
    return keys
