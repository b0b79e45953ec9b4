"""Topology, per-link key pools and the key ledger.

Key material accrues continuously at the link's generation rate and is
applied lazily at event times (exact for a constant-rate process).
Consumption happens per packet/update; a link whose pool falls below its
reserved threshold is broken until the recovery policy is met.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

from . import qkd

if TYPE_CHECKING:
    from .scenario import Scenario


class RecoveryPolicy(str, Enum):
    """When a broken link becomes usable again: after the pool refills
    to its initial level (default) or merely back above the threshold."""

    FULL = "full"
    THRESHOLD = "threshold"


class ConsumeResult(str, Enum):
    OK = "ok"
    INSUFFICIENT = "insufficient"


@dataclass
class KeyLedger:
    """Cumulative per-link key accounting, all counters non-decreasing.

    ``generated`` counts bits actually credited to the pool (generation
    beyond the pool cap is discarded at the source and never credited),
    so pool == pool_initial + generated - data - routing holds exactly.
    """

    generated: float = 0.0
    data: float = 0.0
    routing: float = 0.0


@dataclass
class LinkState:
    """One QKD-backed link: endpoints, rate, pool and broken flag."""

    link_id: str
    endpoints: tuple[str, str]
    length_km: float
    r_k: float
    pool_initial: float
    threshold: float
    pool: float = field(init=False)
    broken: bool = field(init=False, default=False)
    last_accrual: float = field(init=False, default=0.0)
    ledger: KeyLedger = field(init=False)

    def __post_init__(self) -> None:
        if self.threshold >= self.pool_initial:
            raise ValueError(
                f"link {self.link_id}: threshold {self.threshold} must be below "
                f"initial pool {self.pool_initial}")
        self.pool = self.pool_initial
        self.ledger = KeyLedger()

    def accrue(self, now: float) -> None:
        """Credit key generation since the last accrual, capped at the
        initial pool level."""
        dt = now - self.last_accrual
        if dt > 0.0:
            credit = min(self.r_k * dt, self.pool_initial - self.pool)
            if credit > 0.0:
                self.pool += credit
                self.ledger.generated += credit
            self.last_accrual = now

    def replenish(self, dt: float) -> None:
        """Advance this link's generation clock by ``dt`` seconds."""
        if dt < 0:
            raise ValueError(f"dt must be >= 0, got {dt}")
        self.accrue(self.last_accrual + dt)

    def consume(self, bits: float, now: float, routing: bool = False) -> ConsumeResult:
        """Spend ``bits`` of key material at time ``now``.

        Returns INSUFFICIENT (and spends nothing) if the pool would go
        negative. Crossing the threshold marks the link broken; data
        must never be offered to an already broken link.
        """
        if bits <= 0:
            raise ValueError(f"consumed bits must be positive, got {bits}")
        if self.broken:
            raise RuntimeError(f"link {self.link_id} is broken and cannot carry traffic")
        self.accrue(now)
        if bits > self.pool:
            return ConsumeResult.INSUFFICIENT
        self.pool -= bits
        if routing:
            self.ledger.routing += bits
        else:
            self.ledger.data += bits
        if self.pool < self.threshold:
            self.broken = True
        return ConsumeResult.OK

    def recovery_target(self, policy: RecoveryPolicy) -> float:
        return self.pool_initial if policy is RecoveryPolicy.FULL else self.threshold

    def time_to_recover(self, now: float, policy: RecoveryPolicy) -> float | None:
        """Seconds until a broken link refills to its recovery target;
        None when it never will (zero generation rate)."""
        self.accrue(now)
        deficit = self.recovery_target(policy) - self.pool
        if deficit <= 0:
            return 0.0
        if self.r_k <= 0:
            return None
        return deficit / self.r_k

    def restore(self, now: float) -> None:
        self.accrue(now)
        self.broken = False


class TopologyError(ValueError):
    """Invalid topology: unknown endpoints, duplicates, disconnection."""


@dataclass
class Topology:
    """Nodes, links and adjacency. Links are undirected and unique per
    node pair."""

    nodes: list[str]
    links: dict[str, LinkState]
    adjacency: dict[str, dict[str, str]]  # node -> neighbor -> link id

    @classmethod
    def build(cls, nodes: list[str], links: list[LinkState]) -> "Topology":
        if len(set(nodes)) != len(nodes):
            raise TopologyError("duplicate node ids")
        node_set = set(nodes)
        adjacency: dict[str, dict[str, str]] = {n: {} for n in sorted(nodes)}
        seen_ids: set[str] = set()
        for link in links:
            if link.link_id in seen_ids:
                raise TopologyError(f"duplicate link id {link.link_id!r}")
            seen_ids.add(link.link_id)
            a, b = link.endpoints
            if a == b:
                raise TopologyError(f"link {link.link_id!r} joins {a!r} to itself")
            for end in (a, b):
                if end not in node_set:
                    raise TopologyError(f"link {link.link_id!r} references unknown node {end!r}")
            if b in adjacency[a]:
                raise TopologyError(f"parallel link {link.link_id!r} between {a!r} and {b!r}")
            adjacency[a][b] = link.link_id
            adjacency[b][a] = link.link_id
        topo = cls(nodes=sorted(nodes), links={l.link_id: l for l in links}, adjacency=adjacency)
        unreachable = node_set - topo.reachable_from(topo.nodes[0], include_broken=True)
        if unreachable:
            raise TopologyError(f"topology is disconnected: cannot reach {sorted(unreachable)}")
        return topo

    def link_between(self, a: str, b: str) -> LinkState | None:
        link_id = self.adjacency.get(a, {}).get(b)
        return self.links[link_id] if link_id is not None else None

    def alive_neighbors(self, node: str) -> list[tuple[str, LinkState]]:
        out = []
        for neighbor in sorted(self.adjacency[node]):
            link = self.links[self.adjacency[node][neighbor]]
            if not link.broken:
                out.append((neighbor, link))
        return out

    def reachable_from(self, start: str, include_broken: bool = False) -> set[str]:
        """BFS reachability over alive links (or all links)."""
        seen = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for neighbor, link_id in self.adjacency[node].items():
                if not include_broken and self.links[link_id].broken:
                    continue
                if neighbor not in seen:
                    seen.add(neighbor)
                    frontier.append(neighbor)
        return seen

    def accrue_all(self, now: float) -> None:
        for link in self.links.values():
            link.accrue(now)

    def ledger_residual(self, link: LinkState) -> float:
        """Conservation residual; zero up to float rounding."""
        ledger = link.ledger
        expected = link.pool_initial + ledger.generated - ledger.data - ledger.routing
        return link.pool - expected


def load_topology(scenario: "Scenario") -> Topology:
    """Materialize the scenario topology with per-link key rates.

    Rates are treated as time-independent, so each link's capability is
    computed exactly once here.
    """
    links = []
    for spec in scenario.links:
        params = scenario.device_for(spec.id)
        rate = qkd.secure_rate(spec.length_km, params)
        links.append(LinkState(
            link_id=spec.id,
            endpoints=(spec.a, spec.b),
            length_km=spec.length_km,
            r_k=rate.r_k,
            pool_initial=spec.pool_bits,
            threshold=spec.threshold_bits,
        ))
    return Topology.build(list(scenario.nodes), links)
