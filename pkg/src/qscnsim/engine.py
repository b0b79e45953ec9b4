"""Discrete-event core: traffic injection, hop-by-hop forwarding with
per-hop key consumption, routing timers, pool replenishment and the
trace from which every indicator is computed.

A single logical thread owns all mutable state; two runs with the same
scenario and seed produce bit-identical traces (the event queue is
totally ordered by (time, priority, insertion sequence)).
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .network import ConsumeResult, LinkState, RecoveryPolicy, Topology, load_topology
from .routing import DsdvRouter
from .traffic import make_streams

if TYPE_CHECKING:
    from .scenario import Scenario

# Priorities at equal timestamps: restores first, then routing, then
# data, samples last so they observe the settled state.
_PRIO_TOPOLOGY = 0
_PRIO_ROUTING = 1
_PRIO_INJECT = 2
_PRIO_HOP = 3
_PRIO_SAMPLE = 4

DELIVERED = "delivered"
DROP_NO_ROUTE = "no_route"
DROP_NO_KEY = "insufficient_key"
IN_FLIGHT = "in_flight"


class PacketRecord:
    """Lifecycle of one injected packet."""

    __slots__ = ("source", "destination", "inject_time", "end_time", "outcome", "hops", "bits")

    def __init__(self, source: str, destination: str, inject_time: float, bits: int):
        self.source = source
        self.destination = destination
        self.inject_time = inject_time
        self.end_time: float | None = None
        self.outcome: str = IN_FLIGHT
        self.hops = 0
        self.bits = bits


@dataclass
class TraceLog:
    """Append-only record of a run; everything metrics need."""

    horizon: float
    max_path_latency: float
    packets: list[PacketRecord] = field(default_factory=list)
    routing: list[tuple[float, str, float]] = field(default_factory=list)
    link_events: list[tuple[float, str, str]] = field(default_factory=list)
    pool_samples: list[tuple[float, str, float]] = field(default_factory=list)

    def first_break(self) -> tuple[float, str] | None:
        for time, link_id, event in self.link_events:
            if event == "down":
                return time, link_id
        return None


class Simulation:
    """One run over one scenario. Build, then call :meth:`run` once."""

    def __init__(self, scenario: "Scenario", seed: int | None = None):
        self.scenario = scenario
        self.seed = scenario.engine.seed if seed is None else seed
        self.topology: Topology = load_topology(scenario)
        self.recovery = RecoveryPolicy(scenario.engine.recovery)
        self.router = DsdvRouter(
            self.topology,
            transmit=self._charge_routing,
            header_bits=scenario.routing.header_bits,
            entry_bits=scenario.routing.entry_bits,
        )
        profile = scenario.traffic_profile()
        self.streams = make_streams(profile, self.topology.nodes, self.seed)
        self._hop_latency = {
            link_id: scenario.hop_latency_s(link.length_km)
            for link_id, link in self.topology.links.items()
        }
        self.trace = TraceLog(
            horizon=0.0,
            max_path_latency=scenario.max_path_latency_s(),
        )
        self._heap: list[tuple[float, int, int, int, object]] = []
        self._seq = itertools.count()
        self._halted = False
        self.stop_on_first_break = False

    # -- event plumbing -------------------------------------------------

    def _push(self, time: float, prio: int, kind: int, payload: object) -> None:
        heapq.heappush(self._heap, (time, prio, next(self._seq), kind, payload))

    def run(self, horizon: float | None = None, stop_on_first_break: bool = False) -> TraceLog:
        horizon = self.scenario.engine.horizon_s if horizon is None else horizon
        if horizon <= 0:
            raise ValueError(f"horizon must be positive, got {horizon}")
        self.trace.horizon = horizon
        self.stop_on_first_break = stop_on_first_break

        self._push(0.0, _PRIO_ROUTING, _PRIO_ROUTING, 0)
        self._push(0.0, _PRIO_SAMPLE, _PRIO_SAMPLE, 0)
        for index, stream in enumerate(self.streams):
            event = stream.next_event()
            if event.time <= horizon:
                self._push(event.time, _PRIO_INJECT, _PRIO_INJECT, index)

        while self._heap and not self._halted:
            time, prio, _, kind, payload = heapq.heappop(self._heap)
            if time > horizon:
                break
            if kind == _PRIO_INJECT:
                self._on_inject(time, payload)
            elif kind == _PRIO_HOP:
                record_index, node = payload
                self._on_hop(time, record_index, node)
            elif kind == _PRIO_ROUTING:
                self._on_routing_tick(time, payload)
            elif kind == _PRIO_SAMPLE:
                self._on_sample(time, payload)
            elif kind == _PRIO_TOPOLOGY:
                self._on_restore(time, payload)

        already_sampled = self.trace.pool_samples and self.trace.pool_samples[-1][0] == horizon
        if not self._halted and not already_sampled:
            self._snapshot_pools(horizon)
        return self.trace

    # -- handlers --------------------------------------------------------

    def _on_inject(self, now: float, stream_index: int) -> None:
        stream = self.streams[stream_index]
        record = PacketRecord(stream.source, stream.destination, now, stream.kappa)
        self.trace.packets.append(record)
        self._forward(len(self.trace.packets) - 1, stream.source, now)
        nxt = stream.next_event()
        if nxt.time <= self.trace.horizon:
            self._push(nxt.time, _PRIO_INJECT, _PRIO_INJECT, stream_index)

    def _on_hop(self, now: float, record_index: int, node: str) -> None:
        record = self.trace.packets[record_index]
        if node == record.destination:
            record.end_time = now
            record.outcome = DELIVERED
            return
        self._forward(record_index, node, now)

    def _forward(self, record_index: int, node: str, now: float) -> None:
        record = self.trace.packets[record_index]
        hop = self.router.next_hop(node, record.destination)
        if hop is None:
            record.end_time = now
            record.outcome = DROP_NO_ROUTE
            return
        link = self.topology.link_between(node, hop)
        if link is None or link.broken:
            # Tables are repaired synchronously on breaks, so a stale
            # first hop cannot occur; kept as a drop for safety.
            record.end_time = now
            record.outcome = DROP_NO_ROUTE
            return
        if link.consume(record.bits, now) is ConsumeResult.INSUFFICIENT:
            record.end_time = now
            record.outcome = DROP_NO_KEY
            return
        record.hops += 1
        if link.broken:
            self._handle_break(link, now)
        self._push(now + self._hop_latency[link.link_id], _PRIO_HOP, _PRIO_HOP,
                   (record_index, hop))

    def _on_routing_tick(self, now: float, tick: int) -> None:
        ticks_per_dump = self.scenario.routing.ticks_per_dump
        self.router.periodic_update(now, full=(tick % ticks_per_dump == 0))
        next_time = (tick + 1) * self.scenario.routing.hello_period_s
        if next_time <= self.trace.horizon and not self._halted:
            self._push(next_time, _PRIO_ROUTING, _PRIO_ROUTING, tick + 1)

    def _on_sample(self, now: float, index: int) -> None:
        self._snapshot_pools(now)
        next_time = (index + 1) * self.scenario.engine.sample_period_s
        if next_time <= self.trace.horizon:
            self._push(next_time, _PRIO_SAMPLE, _PRIO_SAMPLE, index + 1)

    def _on_restore(self, now: float, link_id: str) -> None:
        link = self.topology.links[link_id]
        link.restore(now)
        self.trace.link_events.append((now, link_id, "up"))
        self._snapshot_pools(now)
        self.router.on_topology_change(link, "restored", now)

    # -- shared machinery --------------------------------------------------

    def _charge_routing(self, sender: str, receiver: str, link: LinkState,
                        bits: float, now: float) -> bool:
        if link.broken:
            return False
        if link.consume(bits, now, routing=True) is ConsumeResult.INSUFFICIENT:
            return False
        self.trace.routing.append((now, link.link_id, bits))
        if link.broken:
            self._handle_break(link, now)
        return True

    def _handle_break(self, link: LinkState, now: float) -> None:
        self.trace.link_events.append((now, link.link_id, "down"))
        self._snapshot_pools(now)
        if self.stop_on_first_break:
            self._halted = True
        recover_in = link.time_to_recover(now, self.recovery)
        if recover_in is not None:
            self._push(now + recover_in, _PRIO_TOPOLOGY, _PRIO_TOPOLOGY, link.link_id)
        self.router.on_topology_change(link, "broken", now)

    def _snapshot_pools(self, now: float) -> None:
        for link_id in sorted(self.topology.links):
            link = self.topology.links[link_id]
            link.accrue(now)
            self.trace.pool_samples.append((now, link_id, link.pool))


def run(scenario: "Scenario", seed: int | None = None, horizon: float | None = None,
        stop_on_first_break: bool = False) -> TraceLog:
    """Run one replication and return its trace."""
    sim = Simulation(scenario, seed=seed)
    return sim.run(horizon=horizon, stop_on_first_break=stop_on_first_break)
