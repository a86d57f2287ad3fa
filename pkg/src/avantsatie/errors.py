"""Exception types shared across the package."""


class ContractViolationError(ValueError):
    """An operation was called with inputs that break its preconditions."""


class DegenerateTargetError(ValueError):
    """A gaze target coincides with the effector / base or is a zero vector."""


class GridBuildError(RuntimeError):
    """Posture grid construction failed at a specific knot."""


class RunawayEpisodeError(RuntimeError):
    """A simulated episode exceeded its tick budget without finishing."""


class LoadError(ValueError):
    """A config or data file could not be read or validated."""


class CorruptLogError(LoadError):
    """A session log line failed to parse; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnknownSessionError(KeyError):
    """No live session with the given id."""
