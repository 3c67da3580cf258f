"""
Domain Models for the WiMAX UGS uplink simulator

These are pure data models with no IO. They define the core domain language:
service classes, flows, packets, engine events, grants and per-flow metrics.
Times are integer microseconds (SimTime); rates are bits/s.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Dict, Optional, Tuple

US_PER_S = 1_000_000
# Config rates are kB/s (bytes/s / 1000); x8000 gives bits/s.
BITS_PER_S_PER_UNIT = 8000

SimTime = int


def seconds_to_us(seconds: float | str | Decimal) -> SimTime:
    """Convert seconds to integer µs, rounding half-up (0.0015 -> 1500)."""
    us = Decimal(str(seconds)) * US_PER_S
    return int(us.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def us_to_seconds(us: SimTime) -> float:
    return us / US_PER_S


def format_seconds(us: SimTime) -> str:
    """µs -> seconds string with 6 decimals, exact (no float formatting)."""
    sign = "-" if us < 0 else ""
    whole, frac = divmod(abs(us), US_PER_S)
    return f"{sign}{whole}.{frac:06d}"


class ServiceClass(str, Enum):
    """802.16 scheduling service classes"""
    UGS = "UGS"
    RTPS = "rtPS"
    ERTPS = "ertPS"
    NRTPS = "nrtPS"
    BE = "BE"

    @property
    def qos_params(self) -> Tuple[str, ...]:
        return SERVICE_CLASS_PARAMS[self]

    @property
    def description(self) -> str:
        return SERVICE_CLASS_DESCRIPTIONS[self]

    @property
    def scheduled(self) -> bool:
        # Only UGS has a scheduling discipline here; the rest are declared.
        return self is ServiceClass.UGS


SERVICE_CLASS_PARAMS: Dict[ServiceClass, Tuple[str, ...]] = {
    ServiceClass.UGS: (
        "Maximum Sustained Rate",
        "Maximum Latency Tolerance",
        "Jitter Tolerance",
    ),
    ServiceClass.RTPS: (
        "Traffic Priority",
        "Maximum Latency Tolerance",
        "Maximum Reserved Rate",
    ),
    ServiceClass.ERTPS: (
        "Minimum Reserved Rate",
        "Maximum Sustained Rate",
        "Maximum Latency Tolerance",
        "Jitter Tolerance",
        "Traffic Priority",
    ),
    ServiceClass.NRTPS: (
        "Traffic Priority",
        "Maximum Reserved Rate",
        "Maximum Sustained Rate",
    ),
    ServiceClass.BE: (
        "Maximum Sustained Rate",
        "Traffic Priority",
    ),
}

SERVICE_CLASS_DESCRIPTIONS: Dict[ServiceClass, str] = {
    ServiceClass.UGS: "Real-time data streams comprising fixed size data packets at periodic intervals",
    ServiceClass.RTPS: "Real-time service flows that periodically generate variable-size data packets",
    ServiceClass.ERTPS: "Real-time service flows that generate variable-sized data packets on a periodic basis",
    ServiceClass.NRTPS: "Non-real-time services that require variable size data grants on a regular basis",
    ServiceClass.BE: "Data streams for which no minimum service level is required",
}


class ControllerMode(str, Enum):
    BASELINE = "baseline"
    QOE = "qoe"


class EventKind(str, Enum):
    PACKET_ARRIVAL = "PacketArrival"
    FRAME_BOUNDARY = "FrameBoundary"
    CONTROL_EPOCH = "ControlEpoch"
    RATE_RESET = "RateReset"
    END_OF_SIMULATION = "EndOfSimulation"


class EnqueueResult(str, Enum):
    ACCEPTED = "Accepted"
    DROPPED = "Dropped"


class TraceKind(str, Enum):
    SENT = "s"
    RECEIVED = "r"
    DROPPED = "d"


BROADCAST = -1


@dataclass(frozen=True)
class Event:
    """A scheduled engine event; subject is a flow id or BROADCAST."""
    fire_at: SimTime
    kind: EventKind
    subject: int = BROADCAST


@dataclass(frozen=True)
class FlowSpec:
    """A user's traffic contract (rates in bits/s, interval in µs)."""
    flow_id: int
    packet_size: int
    send_interval: SimTime
    min_rate: float
    service_class: ServiceClass = ServiceClass.UGS
    priority: int = 0

    @property
    def max_rate(self) -> float:
        return self.packet_size * 8 * US_PER_S / self.send_interval

    @property
    def packet_bits(self) -> int:
        return self.packet_size * 8


@dataclass(slots=True)
class Packet:
    flow_id: int
    seq: int
    size: int
    created_at: SimTime
    delivered_at: Optional[SimTime] = None

    @property
    def bits(self) -> int:
        return self.size * 8

    @property
    def delay(self) -> Optional[SimTime]:
        if self.delivered_at is None:
            return None
        return self.delivered_at - self.created_at


@dataclass(frozen=True)
class LossEvent:
    flow_id: int
    time: SimTime


@dataclass(frozen=True)
class Grant:
    flow_id: int
    bits_this_frame: int


def trace_line(kind: str, time: SimTime, flow_id: int, seq: int, size: int) -> str:
    """One trace line without the newline; `kind` is a TraceKind value."""
    return f"{kind} {format_seconds(time)} {flow_id} {seq} {size}"


@dataclass(frozen=True)
class TraceEvent:
    kind: TraceKind
    time: SimTime
    flow_id: int
    seq: int
    size: int

    def to_line(self) -> str:
        return trace_line(self.kind.value, self.time, self.flow_id, self.seq, self.size)


@dataclass(frozen=True)
class DeliveryRecord:
    """What the metrics need from one delivered packet."""
    seq: int
    size: int
    created_at: SimTime
    delivered_at: SimTime

    @property
    def delay(self) -> SimTime:
        return self.delivered_at - self.created_at


@dataclass
class FlowRecord:
    """Per-flow running totals, fed live by the engine or line by line from a trace.

    Deliveries must arrive in seq order; jitter is accumulated against the
    previous delivery's delay, so nothing per packet is retained.
    """
    flow_id: int
    sent: int = 0
    dropped: int = 0
    delivered: int = 0
    delivered_bits: int = 0
    delay_sum: int = 0
    jitter_sum: int = 0
    last_delay: Optional[SimTime] = None
    last_seq: int = -1

    def deliver(self, seq: int, size: int, delay: SimTime) -> None:
        self.delivered += 1
        self.delivered_bits += size * 8
        self.delay_sum += delay
        if self.last_delay is not None:
            self.jitter_sum += abs(delay - self.last_delay)
        self.last_delay = delay
        self.last_seq = seq

    @property
    def residual(self) -> int:
        return self.sent - self.delivered - self.dropped


@dataclass(frozen=True)
class FlowMetrics:
    """The four per-flow performance parameters plus the counts behind them."""
    flow_id: int
    sent: int
    delivered: int
    dropped: int
    avg_throughput: float  # bits/s
    loss_rate: float
    avg_delay: float  # seconds
    avg_jitter: float  # seconds

    @property
    def residual(self) -> int:
        return self.sent - self.delivered - self.dropped
