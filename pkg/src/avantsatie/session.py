"""Deterministic session engine: one tick loop driving game state, gaze
selection, the posture pipeline, and the nod overlay, fed by queued inputs.

The engine is a pure function of (config, input schedule by tick), which is
what makes JSONL logs replayable to identical final state. Real-time
pacing, threads, and sockets live in the service layer on top.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO

from .chain import Direction, KinematicChain, Posture
from .defaults import default_chain, default_composition, default_expressions, default_layout
from .ebps import PostureGrid, build_grid_from_erik, direction_from_yaw_pitch, ebps_synthesize, load_grids
from .erik import ErikSettings, ExpressionPosture, FilterState, erik_solve, load_expressions, motion_filter_step
from .errors import ContractViolationError, CorruptLogError, LoadError
from .game import (
    Composition,
    Condition,
    GameConfig,
    GameState,
    Done,
    ExpressionChange,
    Affirmative,
    GuessAssessed,
    InvalidKey,
    PhaseChanged,
    Replay,
    FullReplay,
    advance_clock,
    current_prompt,
    handle_key_press,
    load_composition,
    metrics,
    phase_to_dict,
)
from .gaze import (
    AttentionTarget,
    NodSettings,
    PianoKey,
    SceneLayout,
    affirmative_overlay,
    apply_overlay,
    load_layout,
    resolve_direction,
    select_attention,
)
from .geometry import Vec3


# ---------------------------------------------------------------------------
# Inputs

@dataclass(frozen=True)
class KeyPress:
    key: int
    kind = "key_press"


@dataclass(frozen=True)
class FacePosition:
    x: float
    y: float
    z: float
    kind = "face_position"


@dataclass(frozen=True)
class FaceLost:
    kind = "face_lost"


SessionInput = KeyPress | FacePosition | FaceLost


def input_to_dict(inp: SessionInput) -> dict:
    if isinstance(inp, KeyPress):
        return {"type": "key_press", "key": inp.key}
    if isinstance(inp, FacePosition):
        return {"type": "face_position", "x": inp.x, "y": inp.y, "z": inp.z}
    return {"type": "face_lost"}


def input_from_dict(data: dict) -> SessionInput:
    t = data.get("type")
    if t == "key_press":
        return KeyPress(key=int(data["key"]))
    if t == "face_position":
        return FacePosition(x=float(data["x"]), y=float(data["y"]), z=float(data["z"]))
    if t == "face_lost":
        return FaceLost()
    raise LoadError(f"unknown input type {t!r}")


# ---------------------------------------------------------------------------
# Config

@dataclass(frozen=True)
class SessionConfig:
    """Session recipe; None fields mean the built-in defaults."""

    condition: Condition = Condition.ERIK
    chain_file: str | None = None
    expressions_file: str | None = None
    grids_file: str | None = None
    composition_file: str | None = None
    layout_file: str | None = None
    tick_rate_hz: float = 30.0
    seed: int = 0
    hot_cold_mode: str = "absolute"

    def __post_init__(self):
        if not 10.0 <= self.tick_rate_hz <= 120.0:
            raise ContractViolationError(f"tick rate must be in [10, 120] Hz, got {self.tick_rate_hz}")

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        try:
            condition = Condition(data.get("condition", "c-erik"))
        except ValueError as exc:
            raise LoadError(f"unknown condition {data.get('condition')!r}") from exc
        try:
            return cls(
                condition=condition,
                chain_file=data.get("chain"),
                expressions_file=data.get("expressions"),
                grids_file=data.get("grids"),
                composition_file=data.get("composition"),
                layout_file=data.get("layout"),
                tick_rate_hz=float(data.get("tick_rate_hz", 30.0)),
                seed=int(data.get("seed", 0)),
                hot_cold_mode=data.get("hot_cold_mode", "absolute"),
            )
        except (TypeError, ValueError) as exc:
            raise LoadError(f"malformed session config: {exc}") from exc
        except ContractViolationError as exc:
            raise LoadError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "chain": self.chain_file,
            "expressions": self.expressions_file,
            "grids": self.grids_file,
            "composition": self.composition_file,
            "layout": self.layout_file,
            "tick_rate_hz": self.tick_rate_hz,
            "seed": self.seed,
            "hot_cold_mode": self.hot_cold_mode,
        }


@dataclass(frozen=True)
class ResolvedSession:
    """All session artifacts loaded into memory; self-contained so logs can
    embed it and replays never depend on the original files."""

    condition: Condition
    chain: KinematicChain
    expressions: dict[str, ExpressionPosture]
    grids: dict[str, PostureGrid] | None
    composition: Composition
    layout: SceneLayout
    tick_rate_hz: float
    seed: int
    hot_cold_mode: str = "absolute"

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate_hz


def resolve_config(config: SessionConfig) -> ResolvedSession:
    """Load referenced files (or defaults) into a self-contained bundle."""
    chain = load_chain_or_default(config.chain_file)
    expressions = (
        load_expressions(config.expressions_file, chain)
        if config.expressions_file
        else default_expressions(chain)
    )
    grids = load_grids(config.grids_file, chain) if config.grids_file else None
    if config.condition is Condition.EBPS and grids is None:
        grids = {name: build_grid_from_erik(chain, expr) for name, expr in expressions.items()}
    composition = (
        load_composition(config.composition_file) if config.composition_file else default_composition()
    )
    layout = load_layout(config.layout_file) if config.layout_file else default_layout()
    if len(layout.piano_keys) < composition.keyboard.count:
        raise LoadError(
            f"layout has {len(layout.piano_keys)} piano keys, keyboard needs {composition.keyboard.count}"
        )
    return ResolvedSession(
        condition=config.condition,
        chain=chain,
        expressions=expressions,
        grids=grids,
        composition=composition,
        layout=layout,
        tick_rate_hz=config.tick_rate_hz,
        seed=config.seed,
        hot_cold_mode=config.hot_cold_mode,
    )


def load_chain_or_default(path: str | None) -> KinematicChain:
    from .chain import load_chain
    return load_chain(path) if path else default_chain()


# ---------------------------------------------------------------------------
# Posture sources

class ErikPostureSource:
    """Direction-target expressive solves, memoized on (expression, target):
    the solver is pure, so repeated ticks reuse the previous result."""

    def __init__(self, chain: KinematicChain, expressions: dict[str, ExpressionPosture],
                 settings: ErikSettings | None = None):
        self.chain = chain
        self.expressions = expressions
        self.settings = settings or ErikSettings()
        self._memo_key = None
        self._memo_value = None

    def solve(self, expression: str, yaw_deg: float, pitch_deg: float) -> Posture:
        key = (expression, yaw_deg, pitch_deg)
        if key != self._memo_key:
            target = Direction(direction_from_yaw_pitch(yaw_deg, pitch_deg))
            posture, _ = erik_solve(self.chain, self.expressions[expression], target, self.settings)
            self._memo_key = key
            self._memo_value = posture
        return self._memo_value


class EbpsPostureSource:
    """Grid interpolation; queries outside the envelope clamp onto it."""

    def __init__(self, grids: dict[str, PostureGrid]):
        self.grids = grids

    def solve(self, expression: str, yaw_deg: float, pitch_deg: float) -> Posture:
        return ebps_synthesize(self.grids[expression], yaw_deg, pitch_deg)


# ---------------------------------------------------------------------------
# Frames

@dataclass(frozen=True)
class Frame:
    """One tick of observable robot + game state, as served to clients."""

    tick: int
    t: float
    angles_deg: tuple[float, ...]
    expression: str
    attention: AttentionTarget
    phase: dict
    prompt: tuple[str, int]
    highlight: int | None
    events: tuple[dict, ...]
    last_event: str | None

    def to_dict(self) -> dict:
        if isinstance(self.attention, PianoKey):
            attention = {"kind": "piano_key", "index": self.attention.index}
        else:
            attention = {"kind": self.attention.kind}
        return {
            "type": "frame",
            "tick": self.tick,
            "t": self.t,
            "angles_deg": list(self.angles_deg),
            "expression": self.expression,
            "attention": attention,
            "phase": self.phase,
            "prompt": {"id": self.prompt[0], "ordinal": self.prompt[1]},
            "highlight": self.highlight,
            "events": list(self.events),
            "last_event": self.last_event,
        }


def event_to_dict(event) -> dict:
    if isinstance(event, Affirmative):
        return {"kind": "affirmative"}
    if isinstance(event, ExpressionChange):
        return {"kind": "expression_change", "expression": event.expression}
    if isinstance(event, GuessAssessed):
        r = event.record
        return {
            "kind": "guess", "key": r.key, "correct": r.correct,
            "assessment": r.assessment.value, "target_key": r.target_key,
            "level": r.level, "part": r.part, "note": r.note, "time": r.time,
        }
    if isinstance(event, PhaseChanged):
        return {"kind": "phase_change", "phase": phase_to_dict(event.phase)}
    if isinstance(event, InvalidKey):
        return {"kind": "invalid_key", "key": event.key}
    raise ContractViolationError(f"unknown event {event!r}")


# ---------------------------------------------------------------------------
# Engine

class SessionEngine:
    """Single-owner tick engine. submit() only queues; all state changes
    happen inside tick(), in input arrival order at the tick boundary."""

    def __init__(self, resolved: ResolvedSession, log_stream: IO[str] | None = None):
        self.resolved = resolved
        self.dt = resolved.dt
        self.state = GameState(
            composition=resolved.composition,
            condition=resolved.condition,
            config=GameConfig(
                keyboard=resolved.composition.keyboard,
                hot_cold_mode=resolved.hot_cold_mode,
            ),
        )
        if resolved.condition is Condition.EBPS:
            if resolved.grids is None:
                raise ContractViolationError("EBPS condition needs posture grids")
            self.source = EbpsPostureSource(resolved.grids)
        else:
            self.source = ErikPostureSource(resolved.chain, resolved.expressions)
        self.nod = NodSettings()
        self.tick_index = 0
        self.face: Vec3 | None = None
        self.nod_started_at: float | None = None
        self.filter_state: FilterState | None = None
        self.filter_settings = ErikSettings().filter
        self._queue: list[SessionInput] = []
        self._log = log_stream
        self._log_line_count = 0
        if self._log is not None:
            self._write_log({
                "t": 0.0, "tick": 0, "type": "session_start",
                "config": resolved_to_dict(resolved),
            })

    # -- input side (thread-safe enough under the GIL for list.append; the
    # service layer still serializes access with a lock)
    def submit(self, inp: SessionInput) -> None:
        self._queue.append(inp)

    @property
    def done(self) -> bool:
        return isinstance(self.state.phase, Done)

    @property
    def time(self) -> float:
        return self.state.clock

    def _write_log(self, record: dict) -> None:
        if self._log is not None:
            self._log.write(json.dumps(record) + "\n")
            self._log_line_count += 1

    def _expected_key_for_gaze(self) -> int | None:
        phase = self.state.phase
        if isinstance(phase, (Replay, FullReplay)):
            return self.state.expected_key()
        return None

    def tick(self) -> tuple[Frame, list]:
        """Apply queued inputs, advance one dt, emit the frame + events."""
        queued, self._queue = self._queue, []
        events = []
        for inp in queued:
            self._write_log({
                "t": self.state.clock, "tick": self.tick_index, "type": "input",
                "input": input_to_dict(inp),
            })
            if isinstance(inp, KeyPress):
                self.state, new_events = handle_key_press(self.state, inp.key)
                events.extend(new_events)
            elif isinstance(inp, FacePosition):
                self.face = (inp.x, inp.y, inp.z)
            else:
                self.face = None

        for event in events:
            if isinstance(event, Affirmative):
                self.nod_started_at = self.state.clock
            self._write_log({
                "t": self.state.clock, "tick": self.tick_index, "type": "event",
                "event": event_to_dict(event),
            })

        self.state = advance_clock(self.state, self.dt)

        attention = select_attention(
            self.state.phase,
            face_present=self.face is not None,
            replay_cursor=self._expected_key_for_gaze(),
        )
        yaw, pitch = resolve_direction(self.resolved.layout, attention, self.face)
        raw = self.source.solve(self.state.expression, yaw, pitch)
        if self.filter_state is None:
            self.filter_state = FilterState.at_rest(raw)
        else:
            self.filter_state = motion_filter_step(self.filter_state, raw, self.dt, self.filter_settings)
        posture = self.filter_state.posture
        if self.nod_started_at is not None:
            since = self.state.clock - self.nod_started_at
            if since >= self.nod.duration_s:
                self.nod_started_at = None
            else:
                posture = apply_overlay(
                    self.resolved.chain, posture, affirmative_overlay(since, self.resolved.chain, self.nod)
                )

        event_dicts = tuple(event_to_dict(e) for e in events)
        frame = Frame(
            tick=self.tick_index,
            t=self.state.clock,
            angles_deg=posture.degrees(),
            expression=self.state.expression,
            attention=attention,
            phase=phase_to_dict(self.state.phase),
            prompt=current_prompt(self.state),
            highlight=self._expected_key_for_gaze(),
            events=event_dicts,
            last_event=event_dicts[-1]["kind"] if event_dicts else None,
        )
        if self.done and self._log is not None:
            self._write_log({
                "t": self.state.clock, "tick": self.tick_index, "type": "metrics",
                "metrics": metrics(self.state).to_dict(),
            })
        self.tick_index += 1
        return frame, events

    def filtered_posture(self) -> Posture | None:
        return self.filter_state.posture if self.filter_state else None

    def snapshot(self) -> dict:
        """Full state for late subscribers, including the static scene
        description the browser client draws from."""
        from .chain import chain_to_dict

        m = metrics(self.state)
        keyboard = self.state.config.keyboard
        key_ys = [k[1] for k in self.resolved.layout.piano_keys]
        return {
            "type": "snapshot",
            "tick": self.tick_index,
            "t": self.state.clock,
            "phase": phase_to_dict(self.state.phase),
            "prompt": {"id": current_prompt(self.state)[0], "ordinal": current_prompt(self.state)[1]},
            "expression": self.state.expression,
            "angles_deg": list(self.filter_state.posture.degrees()) if self.filter_state else None,
            "highlight": self._expected_key_for_gaze(),
            "metrics": m.to_dict(),
            "done": self.done,
            "chain": chain_to_dict(self.resolved.chain),
            "keyboard": {
                "count": keyboard.count,
                "lowest_midi": keyboard.lowest_midi,
                "names": [keyboard.name_of(i) for i in range(keyboard.count)],
                "white": [keyboard.is_white(i) for i in range(keyboard.count)],
            },
            "scene": {
                "player_x": self.resolved.layout.player_home[0],
                "player_z": self.resolved.layout.player_home[2],
                "y_min": min(key_ys) - 0.1,
                "y_max": max(key_ys) + 0.1,
            },
        }


# ---------------------------------------------------------------------------
# Self-contained session serialization (embedded in logs)

def resolved_to_dict(resolved: ResolvedSession) -> dict:
    from .chain import chain_to_dict
    from .ebps import grids_to_dict
    from .erik import expressions_to_dict
    from .game import composition_to_dict
    from .gaze import layout_to_dict

    return {
        "condition": resolved.condition.value,
        "chain": chain_to_dict(resolved.chain),
        "expressions": expressions_to_dict(resolved.expressions),
        "grids": grids_to_dict(resolved.grids) if resolved.grids is not None else None,
        "composition": composition_to_dict(resolved.composition),
        "layout": layout_to_dict(resolved.layout),
        "tick_rate_hz": resolved.tick_rate_hz,
        "seed": resolved.seed,
        "hot_cold_mode": resolved.hot_cold_mode,
    }


def resolved_from_dict(data: dict) -> ResolvedSession:
    from .chain import chain_from_dict
    from .ebps import grids_from_dict
    from .erik import expressions_from_dict
    from .game import composition_from_dict
    from .gaze import layout_from_dict

    try:
        chain = chain_from_dict(data["chain"])
        return ResolvedSession(
            condition=Condition(data["condition"]),
            chain=chain,
            expressions=expressions_from_dict(data["expressions"], chain),
            grids=grids_from_dict(data["grids"], chain) if data.get("grids") else None,
            composition=composition_from_dict(data["composition"]),
            layout=layout_from_dict(data["layout"]),
            tick_rate_hz=float(data["tick_rate_hz"]),
            seed=int(data["seed"]),
            hot_cold_mode=data.get("hot_cold_mode", "absolute"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise LoadError(f"malformed embedded session config: {exc!r}") from exc


# ---------------------------------------------------------------------------
# Log replay

def read_session_log(path: str) -> list[dict]:
    records = []
    try:
        with open(path) as fh:
            for i, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise CorruptLogError(i, f"invalid JSON: {exc.msg}") from exc
    except OSError as exc:
        raise LoadError(f"cannot read session log {path}: {exc}") from exc
    if not records:
        raise CorruptLogError(1, "log is empty")
    return records


def replay_session_log(path: str) -> tuple[GameState, dict]:
    """Re-execute a session log deterministically; returns the final game
    state and a comparison of replayed vs logged metrics."""
    records = read_session_log(path)
    head = records[0]
    if head.get("type") != "session_start" or "config" not in head:
        raise CorruptLogError(1, "first record must be session_start with an embedded config")
    resolved = resolved_from_dict(head["config"])
    engine = SessionEngine(resolved)

    inputs_by_tick: dict[int, list[SessionInput]] = {}
    logged_metrics = None
    last_tick = 0
    for i, record in enumerate(records[1:], start=2):
        rtype = record.get("type")
        if rtype == "input":
            try:
                tick = int(record["tick"])
                inputs_by_tick.setdefault(tick, []).append(input_from_dict(record["input"]))
            except (KeyError, TypeError, ValueError, LoadError) as exc:
                raise CorruptLogError(i, f"bad input record: {exc}") from exc
            last_tick = max(last_tick, tick)
        elif rtype == "metrics":
            logged_metrics = record.get("metrics")
            last_tick = max(last_tick, int(record.get("tick", 0)))
        elif rtype == "event":
            last_tick = max(last_tick, int(record.get("tick", 0)))
        elif rtype == "session_start":
            raise CorruptLogError(i, "duplicate session_start")
        else:
            raise CorruptLogError(i, f"unknown record type {rtype!r}")

    for tick in range(last_tick + 1):
        for inp in inputs_by_tick.get(tick, ()):
            engine.submit(inp)
        engine.tick()

    replayed = metrics(engine.state).to_dict()
    return engine.state, {"replayed": replayed, "logged": logged_metrics}
