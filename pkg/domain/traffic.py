"""
Constant-bit-rate packet sources, one per subscriber station.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

from .errors import ZeroInterval
from .models import US_PER_S, FlowSpec, Packet, SimTime


def rate_of(packet_size: int, interval: float) -> float:
    """Rate in config units (kB/s): bytes / interval_seconds / 1000 (200 B / 1 ms -> 200)."""
    if interval <= 0:
        raise ZeroInterval(interval)
    return packet_size / interval / 1000


def bits_rate_of(packet_size: int, interval: float) -> float:
    if interval <= 0:
        raise ZeroInterval(interval)
    return packet_size * 8 / interval


def gap_us(packet_bits: int, rate: float) -> SimTime:
    """Inter-packet gap at `rate` bits/s, rounded half-up to whole µs."""
    if rate <= 0:
        raise ZeroInterval(0.0)
    return max(1, math.floor(packet_bits * US_PER_S / rate + 0.5))


@dataclass
class CbrSource:
    """Emits fixed-size packets; the cadence follows whatever rate it is handed."""
    flow: FlowSpec
    next_seq: int = field(default=0)
    _rate: float = field(default=-1.0, repr=False)
    _interval: SimTime = field(default=0, repr=False)

    def interval_for(self, current_rate: float) -> SimTime:
        if current_rate != self._rate:
            self._interval = self._gap(current_rate)
            self._rate = current_rate
        return self._interval

    def _gap(self, current_rate: float) -> SimTime:
        if current_rate >= self.flow.max_rate:
            return self.flow.send_interval
        return gap_us(self.flow.packet_bits, current_rate)

    def next_emission(self, current_rate: float, now: SimTime) -> Tuple[Packet, SimTime]:
        seq = self.next_seq
        self.next_seq = seq + 1
        packet = Packet(self.flow.flow_id, seq, self.flow.packet_size, now)
        return packet, now + self.interval_for(current_rate)

