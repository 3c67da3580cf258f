"""
One simulation run: wires the engine, the CBR sources, the uplink MAC and the
rate controller, and accumulates the per-flow records the metrics need.

No file IO here; trace lines leave through the `emit` callback as
`(kind, time, flow_id, seq, size)` with `kind` a TraceKind value.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .config import ScenarioConfig
from .controller import QoeController
from .engine import Engine
from .mac import FlowQueue, allocate_grants, build_queues, enqueue, transmit_frame
from .metrics import ThroughputSeries, compute_all
from .models import (
    ControllerMode, EnqueueResult, EventKind, FlowMetrics, FlowRecord, Grant, LossEvent, SimTime,
    TraceKind,
)
from .traffic import CbrSource

logger = logging.getLogger(__name__)

Emit = Callable[[str, SimTime, int, int, int], None]

SENT = TraceKind.SENT.value
RECEIVED = TraceKind.RECEIVED.value
DROPPED = TraceKind.DROPPED.value
ARRIVAL = EventKind.PACKET_ARRIVAL
FRAME = EventKind.FRAME_BOUNDARY


@dataclass
class SimulationResult:
    mode: ControllerMode
    duration: SimTime
    events: int
    metrics: List[FlowMetrics]
    records: Dict[int, FlowRecord]
    queues: Dict[int, FlowQueue]
    controller: QoeController
    series: ThroughputSeries
    event_log: List[Tuple[SimTime, str, int]] = field(default_factory=list)
    clock: SimTime = 0

    def conservation(self) -> Dict[int, Tuple[int, int, int, int]]:
        """flow -> (created, delivered, dropped, residual in queue)."""
        return {
            fid: (rec.sent, rec.delivered, rec.dropped, len(self.queues[fid]))
            for fid, rec in self.records.items()
        }


class Simulation:
    def __init__(self, cfg: ScenarioConfig, emit: Optional[Emit] = None, record_events: bool = False) -> None:
        self.cfg = cfg
        self.flows = cfg.flow_specs()
        self.engine = Engine(seed=cfg.seed, record=record_events)
        self.controller = QoeController(self.flows, cfg.controller)
        self.sources = {f.flow_id: CbrSource(f) for f in self.flows}
        self.queues = build_queues(self.sources, cfg.mac)
        self.records = {f.flow_id: FlowRecord(flow_id=f.flow_id) for f in self.flows}
        self.series = ThroughputSeries(cfg.duration_us)
        self._emit = emit
        self._frame_us = cfg.mac.frame_duration_us
        self._epoch_us = cfg.controller.control_epoch_us
        self._reset_us = cfg.controller.reset_period_us
        self._duration = cfg.duration_us
        self._sustained = {f.flow_id: f.max_rate for f in self.flows}
        # Sending rates and grants only change at epochs and resets.
        self._rates: Dict[int, float] = self.controller.snapshot()
        self._grants: List[Grant] = allocate_grants(self._grant_rates(), cfg.mac)

        engine = self.engine
        engine.on(ARRIVAL, self._on_arrival)
        engine.on(FRAME, self._on_frame)
        engine.on(EventKind.CONTROL_EPOCH, self._on_epoch)
        engine.on(EventKind.RATE_RESET, self._on_reset)
        engine.on(EventKind.END_OF_SIMULATION, self._on_end)

    def _grant_rates(self) -> Dict[int, float]:
        if self.cfg.mac.grant_basis == "current":
            return self.controller.snapshot()
        return self._sustained

    def _rates_changed(self) -> None:
        self._rates = self.controller.snapshot()
        if self.cfg.mac.grant_basis == "current":
            self._grants = allocate_grants(self._rates, self.cfg.mac)

    def _on_arrival(self, now: SimTime, fid: int) -> None:
        packet, next_time = self.sources[fid].next_emission(self._rates[fid], now)
        record = self.records[fid]
        record.sent += 1
        emit = self._emit
        if emit is not None:
            emit(SENT, now, fid, packet.seq, packet.size)
        if enqueue(self.queues[fid], packet) is EnqueueResult.DROPPED:
            record.dropped += 1
            if emit is not None:
                emit(DROPPED, now, fid, packet.seq, packet.size)
            self.controller.on_loss(LossEvent(fid, now))
        if next_time <= self._duration:
            self.engine.push(next_time, ARRIVAL, fid)

    def _on_frame(self, now: SimTime, _subject: int) -> None:
        records = self.records
        add = self.series.add
        emit = self._emit
        for packet in transmit_frame(self.queues, self._grants, now):
            fid, size = packet.flow_id, packet.size
            records[fid].deliver(packet.seq, size, now - packet.created_at)
            add(fid, now, size * 8)
            if emit is not None:
                emit(RECEIVED, now, fid, packet.seq, size)
        if now + self._frame_us <= self._duration:
            self.engine.push(now + self._frame_us, FRAME)

    def _on_epoch(self, now: SimTime, _subject: int) -> None:
        if self.controller.on_control_epoch(now):
            self._rates_changed()
        if now + self._epoch_us <= self._duration:
            self.engine.push(now + self._epoch_us, EventKind.CONTROL_EPOCH)

    def _on_reset(self, now: SimTime, _subject: int) -> None:
        self.controller.on_reset(now)
        self._rates_changed()
        # No reset at the end-of-run instant.
        if now + self._reset_us < self._duration:
            self.engine.push(now + self._reset_us, EventKind.RATE_RESET)

    def _on_end(self, now: SimTime, _subject: int) -> None:
        logger.info("end of simulation at %d us (%s mode)", now, self.controller.mode.value)

    def run(self) -> SimulationResult:
        engine = self.engine
        duration = self._duration
        logger.info(
            "starting %s run: %d flows, %.1f s, seed %d",
            self.controller.mode.value, len(self.flows), duration / 1e6, self.cfg.seed,
        )
        engine.schedule_at(duration, EventKind.END_OF_SIMULATION)
        for fid in self.sources:
            engine.schedule_at(0, ARRIVAL, fid)
        if self._frame_us <= duration:
            engine.schedule_at(self._frame_us, FRAME)
        if self.controller.adaptive:
            if self._epoch_us <= duration:
                engine.schedule_at(self._epoch_us, EventKind.CONTROL_EPOCH)
            if self._reset_us < duration:
                engine.schedule_at(self._reset_us, EventKind.RATE_RESET)
        events = engine.run(duration)
        metrics = compute_all(self.records.values(), duration)
        return SimulationResult(
            mode=self.controller.mode,
            duration=duration,
            events=events,
            metrics=metrics,
            records=self.records,
            queues=self.queues,
            controller=self.controller,
            series=self.series,
            event_log=engine.event_log,
            clock=engine.clock,
        )


def simulate(cfg: ScenarioConfig, emit: Optional[Emit] = None, record_events: bool = False) -> SimulationResult:
    return Simulation(cfg, emit=emit, record_events=record_events).run()
