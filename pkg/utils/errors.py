"""
Exception hierarchy for the acoustic injection simulator.
"""

from typing import Iterable, List, Optional


class SimulationError(Exception):
    """Base class for all simulator errors"""


class ConfigurationError(SimulationError, ValueError):
    """Invalid calibration, scenario or application configuration.

    Carries every problem found so callers can report them together.
    """

    def __init__(self, messages, source: Optional[str] = None):
        if isinstance(messages, str):
            messages = [messages]
        self.messages: List[str] = list(messages)
        self.source = source
        prefix = f"{source}: " if source else ""
        super().__init__(prefix + "; ".join(self.messages))


class ValidationError(SimulationError, ValueError):
    """A physical quantity or domain type violates its invariant"""


class StorageUnavailableError(SimulationError):
    """The storage target cannot serve requests (RAID array failed)"""


class TraceParseError(SimulationError, ValueError):
    """Malformed block-trace input"""

    def __init__(self, path: str, problems: Iterable[tuple]):
        self.path = path
        self.problems = list(problems)
        details = ", ".join(f"line {line}: {reason}" for line, reason in self.problems[:10])
        more = f" (+{len(self.problems) - 10} more)" if len(self.problems) > 10 else ""
        super().__init__(f"Malformed trace {path}: {details}{more}")
