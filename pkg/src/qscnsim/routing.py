"""Destination-sequenced distance-vector routing over the live topology.

Periodic full-table dumps plus single-entry keep-alives; link breaks
trigger odd-sequence invalidations that flood immediately. Every update
transmission is charged against the key pool of the link it crosses via
an engine-supplied callback, so routing overhead competes with data for
key material.

All iteration orders are sorted and the update queue is FIFO, making
table evolution a deterministic function of the event history.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable

from .network import LinkState, Topology

INFINITE_METRIC = 1 << 24

# transmit(sender, receiver, link, bits, now) -> delivered?
TransmitFn = Callable[[str, str, LinkState, float, float], bool]


@dataclass(frozen=True)
class RouteEntry:
    destination: str
    next_hop: str
    metric: int
    sequence: int

    @property
    def reachable(self) -> bool:
        return self.metric < INFINITE_METRIC


@dataclass(frozen=True)
class RoutingUpdate:
    """One update message as sent over one link."""

    origin: str
    receiver: str
    link_id: str
    entries: tuple[tuple[str, int, int], ...]  # (destination, metric, sequence)
    size_bits: float


class DsdvRouter:
    def __init__(
        self,
        topology: Topology,
        transmit: TransmitFn,
        header_bits: float = 96.0,
        entry_bits: float = 96.0,
    ) -> None:
        self.topology = topology
        self._transmit = transmit
        self.header_bits = header_bits
        self.entry_bits = entry_bits
        self.tables: dict[str, dict[str, RouteEntry]] = {}
        self.own_sequence: dict[str, int] = {}
        for node in topology.nodes:
            self.own_sequence[node] = 0
            self.tables[node] = {node: RouteEntry(node, node, 0, 0)}
        # (origin, entries) pending flooding; reentrant appends are fine.
        self._queue: deque[tuple[str, tuple[tuple[str, int, int], ...]]] = deque()
        self._sent_log: list[RoutingUpdate] = []
        self._draining = False

    # -- queries ------------------------------------------------------

    def next_hop(self, node: str, destination: str) -> str | None:
        """Next hop toward a destination, or None when unreachable."""
        entry = self.tables[node].get(destination)
        if entry is None or not entry.reachable:
            return None
        return entry.next_hop

    def route_path(self, source: str, destination: str) -> list[str] | None:
        """Link ids along the converged route, or None when unroutable."""
        path: list[str] = []
        node = source
        for _ in range(len(self.topology.nodes)):
            if node == destination:
                return path
            hop = self.next_hop(node, destination)
            if hop is None:
                return None
            link = self.topology.link_between(node, hop)
            if link is None or link.broken:
                return None
            path.append(link.link_id)
            node = hop
        return None  # loop: never happens on converged tables

    # -- update generation --------------------------------------------

    def periodic_update(self, now: float, full: bool) -> list[RoutingUpdate]:
        """Synchronized periodic round: a full table dump (with a fresh
        own sequence number) or a single-entry keep-alive."""
        sent_mark = len(self._sent_log)
        for node in self.topology.nodes:
            if full:
                self.own_sequence[node] += 2
                self._refresh_own_entry(node)
                entries = tuple(
                    (e.destination, e.metric, e.sequence)
                    for _, e in sorted(self.tables[node].items())
                )
            else:
                own = self.tables[node][node]
                entries = ((own.destination, own.metric, own.sequence),)
            self._queue.append((node, entries))
        self._drain(now)
        return self._sent_log[sent_mark:]

    def on_topology_change(self, link: LinkState, event: str, now: float) -> list[RoutingUpdate]:
        """React to a link break or restore.

        A break invalidates every route crossing the link at both
        endpoints and floods the odd-sequence invalidations. A restore
        exchanges full tables across the recovered link.
        """
        sent_mark = len(self._sent_log)
        a, b = link.endpoints
        if event == "broken":
            for node, lost_neighbor in ((a, b), (b, a)):
                invalidated = self._invalidate_via(node, lost_neighbor)
                if invalidated:
                    self._queue.append((node, invalidated))
        elif event == "restored":
            for node in sorted((a, b)):
                entries = tuple(
                    (e.destination, e.metric, e.sequence)
                    for _, e in sorted(self.tables[node].items())
                )
                self._queue.append((node, entries))
        else:
            raise ValueError(f"unknown topology event {event!r}")
        self._drain(now)
        return self._sent_log[sent_mark:]

    # -- internals ----------------------------------------------------

    def _refresh_own_entry(self, node: str) -> None:
        self.tables[node][node] = RouteEntry(node, node, 0, self.own_sequence[node])

    def _invalidate_via(self, node: str, lost_neighbor: str) -> tuple[tuple[str, int, int], ...]:
        changed = []
        table = self.tables[node]
        for destination in sorted(table):
            entry = table[destination]
            if entry.next_hop == lost_neighbor and entry.reachable and destination != node:
                invalid = RouteEntry(destination, lost_neighbor, INFINITE_METRIC, entry.sequence + 1)
                table[destination] = invalid
                changed.append((destination, INFINITE_METRIC, invalid.sequence))
        return tuple(changed)

    def _drain(self, now: float) -> None:
        # A transmission can break a link, whose handling re-enters this
        # router; the outer drain then finishes the queued work.
        if self._draining:
            return
        self._draining = True
        try:
            while self._queue:
                origin, entries = self._queue.popleft()
                size = self.header_bits + len(entries) * self.entry_bits
                for neighbor, link in self.topology.alive_neighbors(origin):
                    if link.broken or not self._transmit(origin, neighbor, link, size, now):
                        continue
                    self._sent_log.append(
                        RoutingUpdate(origin, neighbor, link.link_id, entries, size))
                    changed = self._receive(neighbor, origin, entries)
                    if changed:
                        self._queue.append((neighbor, changed))
        finally:
            self._draining = False

    def _receive(
        self, node: str, sender: str, entries: Iterable[tuple[str, int, int]]
    ) -> tuple[tuple[str, int, int], ...]:
        """Apply received entries; return the adopted changes for
        triggered re-broadcast."""
        table = self.tables[node]
        changed = []
        for destination, metric, sequence in entries:
            if destination == node:
                # Echoes of our own even sequence are ignored; an
                # invalidation about ourselves is outrun with a fresher
                # even sequence.
                if sequence > self.own_sequence[node]:
                    bump = 1 if sequence % 2 else 2
                    self.own_sequence[node] = sequence + bump
                    self._refresh_own_entry(node)
                    changed.append((node, 0, self.own_sequence[node]))
                continue
            advertised = metric if metric >= INFINITE_METRIC else metric + 1
            candidate = RouteEntry(destination, sender, min(advertised, INFINITE_METRIC), sequence)
            current = table.get(destination)
            if current is None:
                if not candidate.reachable:
                    continue
                adopt = True
            elif sequence > current.sequence:
                adopt = True
            elif sequence == current.sequence:
                adopt = (candidate.metric, candidate.next_hop) < (current.metric, current.next_hop)
            else:
                adopt = False
            if adopt and candidate != current:
                table[destination] = candidate
                # Sequence-only refreshes ride the next periodic update;
                # only genuine route changes trigger immediate flooding.
                seq_only = (current is not None
                            and candidate.metric == current.metric
                            and candidate.next_hop == current.next_hop)
                if not seq_only:
                    changed.append((destination, candidate.metric, candidate.sequence))
        return tuple(changed)
