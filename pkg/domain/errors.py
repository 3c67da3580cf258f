"""
Error hierarchy for the simulator. Pure; no IO.

Each error also subclasses the closest builtin (ValueError, KeyError, OSError),
so callers can catch either the domain type or the builtin.
"""
from __future__ import annotations


class SimulationError(Exception):
    """Root of every error raised by this package."""


class SchedulingInPast(SimulationError, ValueError):
    def __init__(self, fire_at: int, clock: int) -> None:
        super().__init__(f"cannot schedule at {fire_at} us; clock is already {clock} us")
        self.fire_at = fire_at
        self.clock = clock


class ZeroInterval(SimulationError, ValueError):
    def __init__(self, interval: float) -> None:
        super().__init__(f"interval must be > 0, got {interval}")
        self.interval = interval


class UnknownFlow(SimulationError, KeyError):
    def __init__(self, flow_id: int) -> None:
        super().__init__(f"unknown flow id {flow_id}")
        self.flow_id = flow_id

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return self.args[0]


class ZeroWindow(SimulationError, ValueError):
    def __init__(self, window: float) -> None:
        super().__init__(f"throughput window must be > 0, got {window}")
        self.window = window


class ConfigInvalid(SimulationError, ValueError):
    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


class TraceError(SimulationError, ValueError):
    """Problem with trace content (not with the file system)."""


class MalformedLine(TraceError):
    def __init__(self, line_no: int, line: str = "", detail: str = "") -> None:
        msg = f"malformed trace line {line_no}"
        if detail:
            msg += f": {detail}"
        if line:
            msg += f" ({line.strip()!r})"
        super().__init__(msg)
        self.line_no = line_no


class OrphanEvent(TraceError):
    def __init__(self, flow_id: int, seq: int, line_no: int | None = None) -> None:
        where = f" at line {line_no}" if line_no is not None else ""
        super().__init__(f"event for flow {flow_id} seq {seq} has no prior 's' line{where}")
        self.flow_id = flow_id
        self.seq = seq
        self.line_no = line_no


class SinkWriteError(SimulationError, OSError):
    def __init__(self, target: str, cause: Exception | None = None) -> None:
        super().__init__(f"could not write trace to {target}: {cause}")
        self.target = target
