"""
Frame-based 802.16 uplink: per-flow queues at the subscriber stations, UGS
grants from the base station and a capacity-limited channel.

Loss comes only from queue overflow. Grants are whole bits, packets are never
fragmented and grant bits left unspent at the end of a frame are discarded.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Iterable, List, Mapping

from .config import MacConfig
from .models import US_PER_S, EnqueueResult, Grant, Packet, SimTime


@dataclass
class FlowQueue:
    flow_id: int
    limit: int
    fifo: Deque[Packet] = field(default_factory=deque)
    enqueue_count: int = 0
    drop_count: int = 0
    delivered_count: int = 0

    def __len__(self) -> int:
        return len(self.fifo)

    @property
    def full(self) -> bool:
        return len(self.fifo) >= self.limit

    def conserved(self) -> bool:
        return self.enqueue_count == self.delivered_count + self.drop_count + len(self.fifo)


def enqueue(queue: FlowQueue, packet: Packet) -> EnqueueResult:
    """Tail-drop enqueue. Every offered packet counts towards enqueue_count."""
    queue.enqueue_count += 1
    if queue.full:
        queue.drop_count += 1
        return EnqueueResult.DROPPED
    queue.fifo.append(packet)
    return EnqueueResult.ACCEPTED


def grant_scale(rates: Mapping[int, float], cfg: MacConfig) -> float:
    """Uniform factor applied to every nominal grant (1.0 when the frame is not oversubscribed)."""
    frame_us = cfg.frame_duration_us
    total = sum(rate * frame_us / US_PER_S for rate in rates.values())
    capacity = cfg.frame_capacity_bits
    if total <= capacity or total == 0:
        return 1.0
    return capacity / total


def allocate_grants(rates: Mapping[int, float], cfg: MacConfig) -> List[Grant]:
    """Nominal grant = rate x frame; proportional scale-down on overload.

    `rates` maps flow id -> bits/s; the returned list is this frame's service order.
    """
    frame_us = cfg.frame_duration_us
    factor = grant_scale(rates, cfg)
    return [
        Grant(flow_id=fid, bits_this_frame=math.floor(rate * frame_us / US_PER_S * factor))
        for fid, rate in rates.items()
    ]


def transmit_frame(queues: Mapping[int, FlowQueue], grants: Iterable[Grant], now: SimTime) -> List[Packet]:
    """Drain whole packets FIFO within each grant; delivered_at is the frame end `now`."""
    delivered: List[Packet] = []
    for grant in grants:
        queue = queues[grant.flow_id]
        remaining = grant.bits_this_frame
        fifo = queue.fifo
        while fifo and fifo[0].size * 8 <= remaining:
            packet = fifo.popleft()
            remaining -= packet.size * 8
            packet.delivered_at = now
            queue.delivered_count += 1
            delivered.append(packet)
    return delivered


def build_queues(flow_ids: Iterable[int], cfg: MacConfig) -> Dict[int, FlowQueue]:
    return {fid: FlowQueue(flow_id=fid, limit=cfg.queue_limit) for fid in flow_ids}
