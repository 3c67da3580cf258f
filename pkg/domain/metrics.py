"""
The four per-flow performance parameters: average throughput, packet loss
rate, average delay and average jitter.

Delays are integer µs, so sums are exact and every mean is a single division.
The live engine and the trace analyzer both feed the same FlowRecord totals,
which is what makes their answers identical.

Jitter is the mean absolute difference between consecutive delivered packets'
delays (drops are bridged).
"""
from __future__ import annotations

from typing import Iterable, List, Sequence

import numpy as np

from .errors import ZeroWindow
from .models import US_PER_S, DeliveryRecord, FlowMetrics, FlowRecord, SimTime


def _delays(deliveries: Sequence[DeliveryRecord]) -> np.ndarray:
    return np.fromiter((d.delay for d in deliveries), dtype=np.int64, count=len(deliveries))


def throughput_from_bits(bits: int, window: SimTime) -> float:
    if window <= 0:
        raise ZeroWindow(window / US_PER_S)
    return bits * US_PER_S / window


def mean_delay(delay_sum: int, delivered: int) -> float:
    if delivered == 0:
        return 0.0
    return delay_sum / delivered / US_PER_S


def mean_jitter(jitter_sum: int, delivered: int) -> float:
    if delivered < 2:
        return 0.0
    return jitter_sum / (delivered - 1) / US_PER_S


def avg_throughput(deliveries: Sequence[DeliveryRecord], window: SimTime) -> float:
    """Delivered payload bits / window (window in µs) -> bits/s."""
    if window <= 0:
        raise ZeroWindow(window / US_PER_S)
    sizes = np.fromiter((d.size for d in deliveries), dtype=np.int64, count=len(deliveries))
    return throughput_from_bits(int(np.sum(sizes)) * 8, window)


def loss_rate(sent: int, dropped: int) -> float:
    if sent == 0:
        return 0.0
    return dropped / sent


def avg_delay(deliveries: Sequence[DeliveryRecord]) -> float:
    """Mean one-way delay in seconds; 0.0 when nothing was delivered."""
    return mean_delay(int(np.sum(_delays(deliveries))), len(deliveries))


def avg_jitter(deliveries: Sequence[DeliveryRecord]) -> float:
    """Mean |delay_i - delay_{i-1}| over deliveries ordered by seq, in seconds."""
    if len(deliveries) < 2:
        return 0.0
    return mean_jitter(int(np.sum(np.abs(np.diff(_delays(deliveries))))), len(deliveries))


def record_of(flow_id: int, sent: int, dropped: int, deliveries: Sequence[DeliveryRecord]) -> FlowRecord:
    """Fold a list of deliveries (any order) into a FlowRecord."""
    record = FlowRecord(flow_id=flow_id, sent=sent, dropped=dropped)
    for d in sorted(deliveries, key=lambda d: d.seq):
        record.deliver(d.seq, d.size, d.delay)
    return record


def flow_metrics(record: FlowRecord, window: SimTime, empty_window_ok: bool = False) -> FlowMetrics:
    """`empty_window_ok` reports zero throughput for a zero window instead of raising ZeroWindow."""
    if empty_window_ok and window == 0:
        throughput = 0.0
    else:
        throughput = throughput_from_bits(record.delivered_bits, window)
    return FlowMetrics(
        flow_id=record.flow_id,
        sent=record.sent,
        delivered=record.delivered,
        dropped=record.dropped,
        avg_throughput=throughput,
        loss_rate=loss_rate(record.sent, record.dropped),
        avg_delay=mean_delay(record.delay_sum, record.delivered),
        avg_jitter=mean_jitter(record.jitter_sum, record.delivered),
    )


def compute_all(
    records: Iterable[FlowRecord], window: SimTime, empty_window_ok: bool = False
) -> List[FlowMetrics]:
    return [flow_metrics(r, window, empty_window_ok) for r in sorted(records, key=lambda r: r.flow_id)]


class ThroughputSeries:
    """Delivered bits per whole second of simulated time, per flow (debug dump)."""

    def __init__(self, duration: SimTime) -> None:
        self.seconds = max(1, -(-duration // US_PER_S))
        self._bins: dict[int, List[int]] = {}

    def add(self, flow_id: int, time: SimTime, bits: int) -> None:
        bins = self._bins.get(flow_id)
        if bins is None:
            bins = self._bins[flow_id] = [0] * self.seconds
        bins[min(time // US_PER_S, self.seconds - 1)] += bits

    def of(self, flow_id: int) -> np.ndarray:
        bins = self._bins.get(flow_id)
        if bins is None:
            return np.zeros(self.seconds, dtype=np.int64)
        return np.asarray(bins, dtype=np.int64)


def throughput_series(deliveries: Sequence[DeliveryRecord], duration: SimTime) -> np.ndarray:
    series = ThroughputSeries(duration)
    for d in deliveries:
        series.add(0, d.delivered_at, d.size * 8)
    return series.of(0)
