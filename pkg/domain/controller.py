"""
QoE rate controller.

Every flow starts at its maximum rate. A packet loss flags the flows for the
current control epoch; at the end of a flagged epoch each flow above its
minimum subjective rate steps down by a fixed per-flow amount, flows already
at the minimum keep their rate. There is no upward recovery between resets:
every `reset_period` from simulation start all flows return to their maximum.

The per-flow step is (max - min) / (descent_duration / control_epoch), so
under sustained loss every flow lands on its minimum at the same instant,
exactly descent_duration after the last reset.

Baseline mode is the fixed-rate reference: it ignores losses, epochs and resets.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

from .config import ControllerConfig
from .errors import UnknownFlow
from .models import ControllerMode, FlowSpec, LossEvent, SimTime

logger = logging.getLogger(__name__)


@dataclass
class RateState:
    flow_id: int
    max_rate: float
    min_rate: float
    descent_epochs: int
    steps_taken: int = 0
    loss_seen_this_epoch: bool = False

    @property
    def step(self) -> float:
        return (self.max_rate - self.min_rate) / self.descent_epochs

    @property
    def current_rate(self) -> float:
        # Endpoints are exact: 0 steps -> max_rate, n steps -> min_rate.
        if self.steps_taken >= self.descent_epochs:
            return self.min_rate
        return self.max_rate - self.steps_taken * self.step

    @property
    def at_min(self) -> bool:
        return self.current_rate <= self.min_rate


def initial_states(flows: Iterable[FlowSpec], cfg: ControllerConfig) -> Dict[int, RateState]:
    return {
        f.flow_id: RateState(
            flow_id=f.flow_id,
            max_rate=f.max_rate,
            min_rate=f.min_rate,
            descent_epochs=cfg.descent_epochs,
        )
        for f in flows
    }


class QoeController:
    def __init__(self, flows: Iterable[FlowSpec], cfg: ControllerConfig) -> None:
        self.cfg = cfg
        self.mode = cfg.mode
        self.states = initial_states(flows, cfg)
        self.resets = 0
        self.reductions = 0
        # (time, flow_id, rate) whenever a rate changes, plus the initial rates.
        self.timeline: List[Tuple[SimTime, int, float]] = [
            (0, fid, s.current_rate) for fid, s in self.states.items()
        ]

    @property
    def adaptive(self) -> bool:
        return self.mode is ControllerMode.QOE

    def _state(self, flow_id: int) -> RateState:
        try:
            return self.states[flow_id]
        except KeyError:
            raise UnknownFlow(flow_id) from None

    def on_loss(self, loss: LossEvent) -> None:
        if not self.adaptive:
            return
        if self.cfg.loss_scope == "culprit":
            self._state(loss.flow_id).loss_seen_this_epoch = True
            return
        self._state(loss.flow_id)
        for state in self.states.values():
            state.loss_seen_this_epoch = True

    def on_control_epoch(self, now: SimTime) -> List[int]:
        """Apply one reduction step to flagged flows above their minimum; returns the flows reduced."""
        if not self.adaptive:
            return []
        reduced: List[int] = []
        for fid, state in self.states.items():
            if state.loss_seen_this_epoch and not state.at_min:
                state.steps_taken += 1
                reduced.append(fid)
                self.timeline.append((now, fid, state.current_rate))
            state.loss_seen_this_epoch = False
        if reduced:
            self.reductions += 1
            logger.debug("t=%d us: reduced flows %s", now, reduced)
        return reduced

    def on_reset(self, now: SimTime) -> None:
        if not self.adaptive:
            return
        self.resets += 1
        for fid, state in self.states.items():
            if state.steps_taken:
                self.timeline.append((now, fid, state.max_rate))
            state.steps_taken = 0
            state.loss_seen_this_epoch = False
        logger.debug("t=%d us: rates reset to maximum (reset #%d)", now, self.resets)

    def current_grant_rate(self, flow_id: int) -> float:
        state = self._state(flow_id)
        if not self.adaptive:
            return state.max_rate
        return state.current_rate

    def snapshot(self) -> Dict[int, float]:
        return {fid: self.current_grant_rate(fid) for fid in self.states}
