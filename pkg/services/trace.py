"""
Per-packet trace files: writing during a run and parsing back into per-flow
records (the trace-extraction step of the analysis workflow).

Grammar (see docs/trace_format.md):
    # duration_us <int>                      optional header / comments
    # mode <name>                            optional header
    <kind> <time> <flow_id> <seq> <size>     kind in {s, r, d}, time in seconds with 6 decimals
"""
from __future__ import annotations

import io
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, TextIO, Tuple

from domain.errors import MalformedLine, OrphanEvent, SinkWriteError
from domain.models import US_PER_S, FlowRecord, SimTime, TraceEvent, TraceKind, trace_line

logger = logging.getLogger(__name__)

HEADER_KEY = "duration_us"
MODE_KEY = "mode"
KINDS = {k.value: k for k in TraceKind}


def emit(event: TraceEvent, sink: TextIO) -> None:
    """Append one trace line to an open text sink."""
    try:
        sink.write(event.to_line() + "\n")
    except (OSError, ValueError) as exc:  # ValueError: write to closed file
        raise SinkWriteError(getattr(sink, "name", "<stream>"), exc) from exc


class TraceWriter:
    """Streams a run's trace line by line.

    With a path, lines go to a temp file in the target directory and close()
    moves it into place, so a failed run never leaves a partial trace. Without
    one, lines collect in memory (getvalue()).
    """

    def __init__(
        self, path: Path | str | None, duration: Optional[SimTime] = None, mode: Optional[str] = None
    ) -> None:
        self.path = Path(path) if path is not None else None
        self.lines = 0
        self._tmp: Optional[str] = None
        if self.path is None:
            self._sink: TextIO = io.StringIO()
        else:
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                fd, self._tmp = tempfile.mkstemp(prefix=f".{self.path.name}.", dir=str(self.path.parent))
                self._sink = os.fdopen(fd, "w", encoding="ascii", newline="\n")
            except OSError as exc:
                raise SinkWriteError(str(self.path), exc) from exc
        self._write = self._sink.write
        if duration is not None:
            self._put(f"# {HEADER_KEY} {duration}\n")
        if mode is not None:
            self._put(f"# {MODE_KEY} {mode}\n")

    def _put(self, text: str) -> None:
        try:
            self._write(text)
        except (OSError, ValueError) as exc:
            raise SinkWriteError(str(self.path or "<memory>"), exc) from exc

    def __call__(self, kind: str, time: SimTime, flow_id: int, seq: int, size: int) -> None:
        self._put(trace_line(kind, time, flow_id, seq, size) + "\n")
        self.lines += 1

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.close()
        else:
            self.abort()

    def getvalue(self) -> str:
        if not isinstance(self._sink, io.StringIO):
            raise TypeError("trace was streamed to a file; read it from there")
        return self._sink.getvalue()

    def close(self) -> None:
        if self._tmp is None:
            return
        try:
            self._sink.close()
            os.replace(self._tmp, self.path)
        except OSError as exc:
            self.abort()
            raise SinkWriteError(str(self.path), exc) from exc
        self._tmp = None
        logger.info("wrote %d trace lines to %s", self.lines, self.path)

    def abort(self) -> None:
        if self._tmp is None:
            return
        self._sink.close()
        try:
            os.unlink(self._tmp)
        except OSError:
            logger.warning("could not remove temp trace %s", self._tmp)
        self._tmp = None


def write_atomic(path: Path, text: str) -> None:
    """Whole-file write through a temp file in the same directory."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise SinkWriteError(str(path), exc) from exc


def _is_uint(text: str) -> bool:
    # str.isdigit() also accepts non-ASCII digits, which int() would then parse.
    return text.isascii() and text.isdigit()


def parse_time(text: str, line_no: int, line: str) -> SimTime:
    whole, dot, frac = text.partition(".")
    if not _is_uint(whole) or (dot and not _is_uint(frac)) or len(frac) > 6:
        raise MalformedLine(line_no, line, f"bad time {text!r}")
    return int(whole) * US_PER_S + int(frac.ljust(6, "0"))


@dataclass
class ParsedTrace:
    records: Dict[int, FlowRecord] = field(default_factory=dict)
    duration: Optional[SimTime] = None
    mode: Optional[str] = None
    last_time: SimTime = 0
    open_packets: int = 0

    def window(self, override: Optional[SimTime] = None) -> SimTime:
        if override is not None:
            return override
        if self.duration is not None:
            return self.duration
        return self.last_time

    def window_is_inferred(self, override: Optional[SimTime] = None) -> bool:
        """True when neither an override nor a header fixed the window."""
        return override is None and self.duration is None


def parse(lines: Iterable[str]) -> ParsedTrace:
    """Single streaming pass into per-flow running totals.

    Memory beyond the totals is the set of open packets (sent, not yet
    received or dropped), which is bounded by the queue limits.
    """
    result = ParsedTrace()
    records = result.records
    open_packets: Dict[Tuple[int, int], Tuple[SimTime, int]] = {}
    last_seq: Dict[int, int] = {}
    last_time = 0
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            parts = stripped[1:].split()
            if len(parts) == 2 and parts[0] == HEADER_KEY:
                if not _is_uint(parts[1]):
                    raise MalformedLine(line_no, line, "bad duration header")
                result.duration = int(parts[1])
            elif len(parts) == 2 and parts[0] == MODE_KEY:
                result.mode = parts[1]
            continue
        fields = stripped.split()
        if len(fields) != 5:
            raise MalformedLine(line_no, line, f"expected 5 fields, got {len(fields)}")
        kind_s, time_s, flow_s, seq_s, size_s = fields
        kind = KINDS.get(kind_s)
        if kind is None:
            raise MalformedLine(line_no, line, f"unknown event kind {kind_s!r}")
        time = parse_time(time_s, line_no, line)
        if not (_is_uint(flow_s) and _is_uint(seq_s) and _is_uint(size_s)):
            raise MalformedLine(line_no, line, "flow, seq and size must be non-negative integers")
        flow_id, seq, size = int(flow_s), int(seq_s), int(size_s)
        if time < last_time:
            raise MalformedLine(line_no, line, "time goes backwards")
        last_time = time

        record = records.get(flow_id)
        key = (flow_id, seq)
        if kind is TraceKind.SENT:
            if seq <= last_seq.get(flow_id, -1):
                raise MalformedLine(line_no, line, f"duplicate or out-of-order seq {seq}")
            last_seq[flow_id] = seq
            if record is None:
                record = records[flow_id] = FlowRecord(flow_id=flow_id)
            record.sent += 1
            open_packets[key] = (time, size)
            continue
        opened = open_packets.pop(key, None)
        if opened is None or record is None:
            raise OrphanEvent(flow_id, seq, line_no)
        created_at, sent_size = opened
        if size != sent_size:
            raise MalformedLine(line_no, line, f"size {size} differs from sent size {sent_size}")
        if kind is TraceKind.DROPPED:
            record.dropped += 1
        else:
            # Queues are FIFO, so a flow's deliveries come in seq order.
            if seq < record.last_seq:
                raise MalformedLine(line_no, line, f"delivery of seq {seq} after seq {record.last_seq}")
            record.deliver(seq, size, time - created_at)
    result.last_time = last_time
    result.open_packets = len(open_packets)
    return result


def parse_file(path: Path | str) -> ParsedTrace:
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        return parse(f)
