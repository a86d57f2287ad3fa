"""The hot/cold piano game: levels of parts of notes, guessed one by one,
with replay rewards, warm/cold assessment of wrong guesses, and
condition-dependent expression selection.

GameState is an immutable value advanced by pure transition functions, so
sessions replay deterministically from an input log.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum

from .erik import COLD as COLD_EXPR
from .erik import NEUTRAL as NEUTRAL_EXPR
from .erik import WARM as WARM_EXPR
from .errors import ContractViolationError, LoadError


class Condition(str, Enum):
    ERIK = "c-erik"
    EBPS = "c-ebps"
    CONTROL = "c-control"


class Assessment(str, Enum):
    HOT = "hot"
    COLD = "cold"
    NA = "na"


# ---------------------------------------------------------------------------
# Keyboard

_NOTE_OFFSETS = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_WHITE_PITCH_CLASSES = frozenset(_NOTE_OFFSETS.values())
_NOTE_RE = re.compile(r"^([A-G])([#b]?)(-?\d+)$")
_SHARP_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")


@dataclass(frozen=True)
class Keyboard:
    """Contiguous chromatic key range; the default is one octave C4..C5
    (13 keys: 8 white, 5 black)."""

    lowest_midi: int = 60  # C4
    count: int = 13

    def __post_init__(self):
        if self.count < 2:
            raise ContractViolationError("keyboard needs at least 2 keys")

    def index_of(self, note_name: str) -> int:
        m = _NOTE_RE.match(note_name.strip())
        if not m:
            raise LoadError(f"unrecognized note name {note_name!r}")
        letter, accidental, octave = m.groups()
        midi = 12 * (int(octave) + 1) + _NOTE_OFFSETS[letter]
        if accidental == "#":
            midi += 1
        elif accidental == "b":
            midi -= 1
        index = midi - self.lowest_midi
        if not 0 <= index < self.count:
            raise LoadError(f"note {note_name!r} is outside the keyboard range")
        return index

    def name_of(self, index: int) -> str:
        midi = self.lowest_midi + index
        return f"{_SHARP_NAMES[midi % 12]}{midi // 12 - 1}"

    def is_white(self, index: int) -> bool:
        return (self.lowest_midi + index) % 12 in _WHITE_PITCH_CLASSES

    def valid(self, index: int) -> bool:
        return 0 <= index < self.count


DEFAULT_KEYBOARD = Keyboard()


# ---------------------------------------------------------------------------
# Composition

@dataclass(frozen=True)
class Level:
    name: str
    parts: tuple[tuple[int, ...], ...]

    def note_count(self) -> int:
        return sum(len(p) for p in self.parts)

    def flattened(self) -> tuple[int, ...]:
        return tuple(n for part in self.parts for n in part)


@dataclass(frozen=True)
class Composition:
    """Two levels of parts of key indices; level 1 sticks to white keys."""

    levels: tuple[Level, ...]
    keyboard: Keyboard = DEFAULT_KEYBOARD

    def __post_init__(self):
        if len(self.levels) != 2:
            raise ContractViolationError(f"composition must have exactly 2 levels, got {len(self.levels)}")
        for li, level in enumerate(self.levels):
            if not level.parts:
                raise ContractViolationError(f"level {li + 1} has no parts")
            for pi, part in enumerate(level.parts):
                if not 1 <= len(part) <= 6:
                    raise ContractViolationError(
                        f"level {li + 1} part {pi + 1} must have 1-6 notes, got {len(part)}"
                    )
                for n in part:
                    if not self.keyboard.valid(n):
                        raise ContractViolationError(f"note index {n} outside keyboard")
        for n in self.levels[0].flattened():
            if not self.keyboard.is_white(n):
                raise ContractViolationError("level 1 may only use white keys")

    def note_count(self) -> int:
        return sum(level.note_count() for level in self.levels)


def composition_from_dict(data: dict, keyboard: Keyboard = DEFAULT_KEYBOARD) -> Composition:
    try:
        levels = tuple(
            Level(
                name=level.get("name", f"level {i + 1}"),
                parts=tuple(
                    tuple(keyboard.index_of(note) for note in part)
                    for part in level["parts"]
                ),
            )
            for i, level in enumerate(data["levels"])
        )
    except (KeyError, TypeError) as exc:
        raise LoadError(f"malformed composition: {exc!r}") from exc
    try:
        return Composition(levels=levels, keyboard=keyboard)
    except ContractViolationError as exc:
        raise LoadError(str(exc)) from exc


def composition_to_dict(comp: Composition) -> dict:
    return {
        "levels": [
            {
                "name": level.name,
                "parts": [[comp.keyboard.name_of(n) for n in part] for part in level.parts],
            }
            for level in comp.levels
        ]
    }


def load_composition(path: str, keyboard: Keyboard = DEFAULT_KEYBOARD) -> Composition:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise LoadError(f"cannot read composition file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"composition file {path} is not valid JSON: {exc}") from exc
    return composition_from_dict(data, keyboard)


# ---------------------------------------------------------------------------
# Phases

@dataclass(frozen=True)
class StartScreen:
    kind = "start"


@dataclass(frozen=True)
class Instructions:
    page: int
    kind = "instructions"


@dataclass(frozen=True)
class Guessing:
    level: int
    part: int
    note: int
    kind = "guessing"


@dataclass(frozen=True)
class Replay:
    level: int
    part: int
    cursor: int
    kind = "replay"


@dataclass(frozen=True)
class FullReplay:
    level: int
    cursor: int
    kind = "full_replay"


@dataclass(frozen=True)
class Done:
    kind = "done"


Phase = StartScreen | Instructions | Guessing | Replay | FullReplay | Done


# ---------------------------------------------------------------------------
# Events emitted by transitions

@dataclass(frozen=True)
class Affirmative:
    kind = "affirmative"


@dataclass(frozen=True)
class ExpressionChange:
    expression: str
    kind = "expression_change"


@dataclass(frozen=True)
class GuessAssessed:
    record: "GuessRecord"
    kind = "guess"


@dataclass(frozen=True)
class PhaseChanged:
    phase: Phase
    kind = "phase_change"


@dataclass(frozen=True)
class InvalidKey:
    key: int
    kind = "invalid_key"


GameEvent = Affirmative | ExpressionChange | GuessAssessed | PhaseChanged | InvalidKey


@dataclass(frozen=True)
class GuessRecord:
    """One guess during a Guessing phase. assessment is NA for correct
    guesses and always NA in the control condition (the robot expressed
    nothing), but target_key is kept so the analysis can classify control
    guesses by distance too."""

    time: float
    key: int
    correct: bool
    assessment: Assessment
    target_key: int
    level: int
    part: int
    note: int


@dataclass(frozen=True)
class GameConfig:
    keyboard: Keyboard = DEFAULT_KEYBOARD
    hot_radius: int = 2
    hot_cold_mode: str = "absolute"  # or "relative": warmer/colder than the last wrong guess
    start_key: int = 2  # D4 on the default keyboard
    instruction_pages: int = 2

    def __post_init__(self):
        if self.hot_cold_mode not in ("absolute", "relative"):
            raise ContractViolationError(f"unknown hot/cold mode {self.hot_cold_mode!r}")
        if self.hot_radius < 0:
            raise ContractViolationError("hot_radius must be >= 0")
        if not self.keyboard.valid(self.start_key):
            raise ContractViolationError("start_key outside keyboard")
        if self.instruction_pages < 1:
            raise ContractViolationError("need at least one instruction page")


@dataclass(frozen=True)
class GameState:
    composition: Composition
    condition: Condition
    config: GameConfig = field(default_factory=GameConfig)
    phase: Phase = field(default_factory=StartScreen)
    guess_log: tuple[GuessRecord, ...] = ()
    clock: float = 0.0
    guessing_seconds: float = 0.0
    expression: str = NEUTRAL_EXPR
    last_wrong_distance: int | None = None  # for the relative hot/cold mode

    def __post_init__(self):
        phase = self.phase
        levels = self.composition.levels
        if isinstance(phase, Guessing):
            part = levels[phase.level].parts[phase.part]
            if not 0 <= phase.note < len(part):
                raise ContractViolationError("guessing note index out of bounds")
        elif isinstance(phase, Replay):
            part = levels[phase.level].parts[phase.part]
            if not 0 <= phase.cursor < len(part):
                raise ContractViolationError("replay cursor out of bounds")
        elif isinstance(phase, FullReplay):
            if not 0 <= phase.cursor < levels[phase.level].note_count():
                raise ContractViolationError("full replay cursor out of bounds")

    def expected_key(self) -> int | None:
        """The key that advances the game right now, if any."""
        phase = self.phase
        levels = self.composition.levels
        if isinstance(phase, StartScreen):
            return self.config.start_key
        if isinstance(phase, Guessing):
            return levels[phase.level].parts[phase.part][phase.note]
        if isinstance(phase, Replay):
            return levels[phase.level].parts[phase.part][phase.cursor]
        if isinstance(phase, FullReplay):
            return levels[phase.level].flattened()[phase.cursor]
        return None


def assess_guess(guess_key: int, target_key: int, hot_radius: int = 2) -> Assessment:
    """Hot iff the wrong guess lands within hot_radius semitones of the
    target (boundary inclusive), else Cold."""
    if guess_key == target_key:
        raise ContractViolationError("assess_guess is only defined for wrong guesses")
    return Assessment.HOT if abs(guess_key - target_key) <= hot_radius else Assessment.COLD


def expression_for(condition: Condition, assessment: Assessment) -> str:
    """Posture expression after a guess: control never leaves neutral;
    expressive conditions show warm for hot, cold for cold, neutral after a
    correct guess (assessment NA)."""
    if condition is Condition.CONTROL:
        return NEUTRAL_EXPR
    if assessment is Assessment.HOT:
        return WARM_EXPR
    if assessment is Assessment.COLD:
        return COLD_EXPR
    return NEUTRAL_EXPR


def advance_clock(state: GameState, dt: float) -> GameState:
    """Advance session time; guessing time accumulates only while guessing."""
    if dt < 0:
        raise ContractViolationError("dt must be >= 0")
    guessing = state.guessing_seconds + (dt if isinstance(state.phase, Guessing) else 0.0)
    return replace(state, clock=state.clock + dt, guessing_seconds=guessing)


def _after_part(state: GameState, level: int, part: int) -> tuple[Phase, list[GameEvent]]:
    phase = Replay(level=level, part=part, cursor=0)
    return phase, [PhaseChanged(phase)]


def _after_replay(state: GameState, level: int, part: int) -> tuple[Phase, list[GameEvent]]:
    parts = state.composition.levels[level].parts
    if part + 1 < len(parts):
        phase: Phase = Guessing(level=level, part=part + 1, note=0)
    else:
        phase = FullReplay(level=level, cursor=0)
    return phase, [PhaseChanged(phase)]


def _after_full_replay(state: GameState, level: int) -> tuple[Phase, list[GameEvent]]:
    if level + 1 < len(state.composition.levels):
        phase: Phase = Guessing(level=level + 1, part=0, note=0)
    else:
        phase = Done()
    return phase, [PhaseChanged(phase)]


def handle_key_press(state: GameState, key: int) -> tuple[GameState, list[GameEvent]]:
    """Advance the game by one key press; returns the new state and the
    events the press produced. Unknown keys are ignored with an InvalidKey
    event; Done absorbs everything."""
    if not state.config.keyboard.valid(key):
        return state, [InvalidKey(key)]
    phase = state.phase

    if isinstance(phase, Done):
        return state, []

    if isinstance(phase, StartScreen):
        if key == state.config.start_key:
            new_phase = Instructions(page=0)
            return replace(state, phase=new_phase), [Affirmative(), PhaseChanged(new_phase)]
        return state, []

    if isinstance(phase, Instructions):
        if phase.page + 1 < state.config.instruction_pages:
            new_phase = Instructions(page=phase.page + 1)
            return replace(state, phase=new_phase), [PhaseChanged(new_phase)]
        new_phase = Guessing(level=0, part=0, note=0)
        # instruction set over: the robot turns back and nods again
        return replace(state, phase=new_phase), [Affirmative(), PhaseChanged(new_phase)]

    if isinstance(phase, Guessing):
        target = state.expected_key()
        part_notes = state.composition.levels[phase.level].parts[phase.part]
        if key == target:
            record = GuessRecord(
                time=state.clock, key=key, correct=True, assessment=Assessment.NA,
                target_key=target, level=phase.level, part=phase.part, note=phase.note,
            )
            events: list[GameEvent] = [Affirmative(), GuessAssessed(record)]
            new_expr = expression_for(state.condition, Assessment.NA)
            if new_expr != state.expression:
                events.append(ExpressionChange(new_expr))
            if phase.note + 1 < len(part_notes):
                new_phase: Phase = Guessing(level=phase.level, part=phase.part, note=phase.note + 1)
                events.append(PhaseChanged(new_phase))
            else:
                new_phase, more = _after_part(state, phase.level, phase.part)
                events.extend(more)
            return replace(
                state, phase=new_phase, guess_log=state.guess_log + (record,),
                expression=new_expr, last_wrong_distance=None,
            ), events
        # wrong guess
        distance = abs(key - target)
        if state.condition is Condition.CONTROL:
            assessment = Assessment.NA
        elif state.config.hot_cold_mode == "relative":
            if state.last_wrong_distance is None:
                assessment = Assessment.COLD
            else:
                assessment = Assessment.HOT if distance < state.last_wrong_distance else Assessment.COLD
        else:
            assessment = assess_guess(key, target, state.config.hot_radius)
        record = GuessRecord(
            time=state.clock, key=key, correct=False, assessment=assessment,
            target_key=target, level=phase.level, part=phase.part, note=phase.note,
        )
        events = [GuessAssessed(record)]
        new_expr = state.expression
        if state.condition is not Condition.CONTROL:
            new_expr = expression_for(state.condition, assessment)
            if new_expr != state.expression:
                events.append(ExpressionChange(new_expr))
        return replace(
            state, guess_log=state.guess_log + (record,),
            expression=new_expr, last_wrong_distance=distance,
        ), events

    if isinstance(phase, Replay):
        if key != state.expected_key():
            return state, []
        part_notes = state.composition.levels[phase.level].parts[phase.part]
        if phase.cursor + 1 < len(part_notes):
            new_phase = Replay(level=phase.level, part=phase.part, cursor=phase.cursor + 1)
            return replace(state, phase=new_phase), []
        new_phase, events = _after_replay(state, phase.level, phase.part)
        return replace(state, phase=new_phase), events

    if isinstance(phase, FullReplay):
        if key != state.expected_key():
            return state, []
        total = state.composition.levels[phase.level].note_count()
        if phase.cursor + 1 < total:
            new_phase = FullReplay(level=phase.level, cursor=phase.cursor + 1)
            return replace(state, phase=new_phase), []
        new_phase, events = _after_full_replay(state, phase.level)
        return replace(state, phase=new_phase), events

    raise ContractViolationError(f"unhandled phase {phase!r}")


# ---------------------------------------------------------------------------
# Objective measures

@dataclass(frozen=True)
class Metrics:
    time_s: float
    wrong_hot: int
    wrong_cold: int

    @property
    def wrong_total(self) -> int:
        return self.wrong_hot + self.wrong_cold

    def to_dict(self) -> dict:
        return {
            "time_s": self.time_s,
            "wrong_hot": self.wrong_hot,
            "wrong_cold": self.wrong_cold,
            "wrong_total": self.wrong_total,
        }


def metrics(state: GameState) -> Metrics:
    """Guessing-phase time plus hot/cold counts of wrong guesses.

    Counts use the recorded assessment where the robot expressed one, and
    fall back to distance classification for NA records (control condition):
    the analysis needs distance-classified counts even when unexpressed.
    """
    hot = 0
    cold = 0
    for record in state.guess_log:
        if record.correct:
            continue
        assessment = record.assessment
        if assessment is Assessment.NA:
            assessment = assess_guess(record.key, record.target_key, state.config.hot_radius)
        if assessment is Assessment.HOT:
            hot += 1
        else:
            cold += 1
    return Metrics(time_s=state.guessing_seconds, wrong_hot=hot, wrong_cold=cold)


def current_prompt(state: GameState) -> tuple[str, int]:
    """Machine-readable screen prompt: (prompt id, ordinal)."""
    phase = state.phase
    if isinstance(phase, StartScreen):
        return "start", 0
    if isinstance(phase, Instructions):
        return "instructions", phase.page
    if isinstance(phase, Guessing):
        return "discover_note", phase.note + 1
    if isinstance(phase, Replay):
        return "replay_part", phase.cursor
    if isinstance(phase, FullReplay):
        return "full_replay", phase.cursor
    return "done", 0


def phase_to_dict(phase: Phase) -> dict:
    d: dict = {"kind": phase.kind}
    for attr in ("page", "level", "part", "note", "cursor"):
        if hasattr(phase, attr):
            d[attr] = getattr(phase, attr)
    return d
