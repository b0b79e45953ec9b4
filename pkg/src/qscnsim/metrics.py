"""Network indicators computed from a run trace and, for the
capacity-style indicators, from the scenario itself.

Classical: one-way delay, throughput, packet delivery ratio, routing
cost. Key-material: communication capability (largest per-pair demand
every link can sustain), operation time (time to first pool exhaustion
under overload), recovery time (refill back to the initial pool level)
and efficiency (operation time over operation plus recovery).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .engine import DELIVERED, DROP_NO_KEY, DROP_NO_ROUTE, IN_FLIGHT, Simulation, TraceLog, run
from .network import load_topology
from .scenario import Scenario


def pair_key(source: str, destination: str) -> str:
    return f"{source}->{destination}"


# ---------------------------------------------------------------------------
# classical indicators


@dataclass
class ClassicalSeries:
    """Per-window indicator series; windows with no observations are
    absent rather than zero."""

    window_s: float
    owd: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    throughput: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    pdr: dict[str, list[tuple[float, float]]] = field(default_factory=dict)
    rcost: list[tuple[float, float]] = field(default_factory=list)


def classical_indicators(trace: TraceLog, window_s: float) -> ClassicalSeries:
    """Aggregate the trace into per-window series.

    OWD and throughput are assigned to the delivery window; PDR is
    cumulative delivered/injected; RCost is network-wide routing bits
    per window.
    """
    if window_s <= 0:
        raise ValueError(f"window must be positive, got {window_s}")
    if not trace.packets and not trace.routing:
        raise ValueError("empty trace")
    n_windows = max(1, math.ceil(trace.horizon / window_s))
    series = ClassicalSeries(window_s=window_s)

    pairs = sorted({pair_key(p.source, p.destination) for p in trace.packets})
    owd_acc = {p: [[0.0, 0] for _ in range(n_windows)] for p in pairs}
    bits_acc = {p: [0.0] * n_windows for p in pairs}
    injected = {p: [0] * n_windows for p in pairs}
    delivered = {p: [0] * n_windows for p in pairs}

    def window_of(t: float) -> int:
        return min(n_windows - 1, int(t / window_s))

    eligible_cutoff = trace.horizon - trace.max_path_latency
    for packet in trace.packets:
        key = pair_key(packet.source, packet.destination)
        if packet.inject_time <= eligible_cutoff:
            injected[key][window_of(packet.inject_time)] += 1
        if packet.outcome == DELIVERED:
            w = window_of(packet.end_time)
            owd_acc[key][w][0] += packet.end_time - packet.inject_time
            owd_acc[key][w][1] += 1
            bits_acc[key][w] += packet.bits
            delivered[key][w] += 1

    for key in pairs:
        series.owd[key] = [
            ((w + 1) * window_s, total / count)
            for w, (total, count) in enumerate(owd_acc[key]) if count > 0
        ]
        series.throughput[key] = [
            ((w + 1) * window_s, bits / window_s)
            for w, bits in enumerate(bits_acc[key]) if delivered[key][w] > 0
        ]
        cum_injected = 0
        cum_delivered = 0
        rows = []
        for w in range(n_windows):
            cum_injected += injected[key][w]
            cum_delivered += delivered[key][w]
            if cum_injected > 0:
                rows.append(((w + 1) * window_s, cum_delivered / cum_injected))
        series.pdr[key] = rows

    rcost_acc = [0.0] * n_windows
    for time, _link, bits in trace.routing:
        rcost_acc[window_of(time)] += bits
    series.rcost = [
        ((w + 1) * window_s, bits / window_s)
        for w, bits in enumerate(rcost_acc) if bits > 0
    ]
    return series


# ---------------------------------------------------------------------------
# routes, per-link loads and routing overhead


def converged_paths(scenario: Scenario) -> dict[tuple[str, str], list[str] | None]:
    """Route of every ordered traffic pair on the freshly converged
    tables (one synchronized full dump at t=0, no traffic)."""
    sim = Simulation(scenario)
    sim.router.periodic_update(0.0, full=True)
    return {pair: sim.router.route_path(*pair) for pair in scenario.ordered_pairs()}


def link_loads(scenario: Scenario) -> dict[str, int]:
    """Unit traffic shares per link: the number of ordered pairs whose
    route crosses it."""
    loads = {link.id: 0 for link in scenario.links}
    for path in converged_paths(scenario).values():
        if path:
            for link_id in path:
                loads[link_id] += 1
    return loads


def routing_overhead_bps(scenario: Scenario) -> dict[str, float]:
    """Steady-state routing key consumption per link (both directions)
    under the scenario's frozen update cadence and message sizes."""
    routing = scenario.routing
    n = len(scenario.nodes)
    dump_bits = routing.header_bits + n * routing.entry_bits
    hello_bits = routing.header_bits + routing.entry_bits
    per_direction = dump_bits + (routing.ticks_per_dump - 1) * hello_bits
    rate = 2.0 * per_direction / (routing.ticks_per_dump * routing.hello_period_s)
    return {link.id: rate for link in scenario.links}


# ---------------------------------------------------------------------------
# capability


@dataclass(frozen=True)
class CapabilityResult:
    per_pair_bps: float
    bottleneck_link: str
    mode: str  # "per_pair" or "total"


def its_capability_analytic(
    rates: dict[str, float],
    loads: dict[str, int],
    overhead: dict[str, float],
    mode: str = "per_pair",
) -> CapabilityResult | None:
    """Largest uniform demand for which every link's key consumption
    stays within its generation rate.

    ``mode="per_pair"`` reports the demand of one ordered pair;
    ``mode="total"`` scales by the number of unit shares in the network.
    """
    if mode not in ("per_pair", "total"):
        raise ValueError(f"unknown capability mode {mode!r}")
    best: tuple[float, str] | None = None
    for link_id, shares in sorted(loads.items()):
        if shares <= 0:
            continue  # unloaded links impose no constraint
        ceiling = (rates[link_id] - overhead.get(link_id, 0.0)) / shares
        if best is None or ceiling < best[0]:
            best = (ceiling, link_id)
    if best is None:
        return None
    value, link_id = best
    value = max(0.0, value)
    if mode == "total":
        value *= sum(loads.values())
    return CapabilityResult(per_pair_bps=value, bottleneck_link=link_id, mode=mode)


def capability_analytic_for(scenario: Scenario, mode: str = "per_pair") -> CapabilityResult | None:
    topology = load_topology(scenario)
    rates = {link_id: link.r_k for link_id, link in topology.links.items()}
    return its_capability_analytic(rates, link_loads(scenario), routing_overhead_bps(scenario), mode)


@dataclass(frozen=True)
class CapabilityProbe:
    demand_bps: float
    stable: bool
    first_break_s: float | None


@dataclass(frozen=True)
class EmpiricalCapability:
    per_pair_bps: float | None
    lower_bps: float
    upper_bps: float
    conclusive: bool
    reason: str
    horizon_s: float
    probes: tuple[CapabilityProbe, ...]


def its_capability_empirical(
    scenario: Scenario,
    tolerance_bps: float,
    horizon_s: float | None = None,
    seed: int = 0,
    max_probes: int = 48,
) -> EmpiricalCapability:
    """Bisect the per-pair demand between a stable and an unstable rate.

    Stability of one probe means no link break over the probe horizon,
    which defaults to 10x the slowest pool drain scale
    (pool - threshold) / rate.
    """
    if tolerance_bps <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance_bps}")
    topology = load_topology(scenario)
    generating = [l for l in topology.links.values() if l.r_k > 0]
    if not generating:
        return EmpiricalCapability(None, 0.0, 0.0, False, "no link generates key material",
                                   0.0, ())
    if horizon_s is None:
        horizon_s = 10.0 * max((l.pool_initial - l.threshold) / l.r_k for l in generating)

    # Probe traces are throwaways; sample pools sparsely.
    probe_scenario = scenario.model_copy(update={
        "engine": scenario.engine.model_copy(update={
            "sample_period": max(scenario.engine.sample_period_s, horizon_s / 64.0),
        }),
    })
    probes: list[CapabilityProbe] = []

    def probe(demand_bps: float) -> bool:
        demand = max(demand_bps, 1e-3)  # zero demand still exercises routing load
        trace = run(probe_scenario.with_demand(demand).with_seed(seed),
                    horizon=horizon_s, stop_on_first_break=True)
        broke = trace.first_break()
        probes.append(CapabilityProbe(demand_bps, broke is None,
                                      broke[0] if broke else None))
        return broke is None

    lower = 0.0
    # The upper bracket must overload the bottleneck enough to drain its
    # pool within the probe horizon, not merely exceed the rate.
    spendable = max(l.pool_initial - l.threshold for l in topology.links.values())
    upper = max(l.r_k for l in generating) + 2.0 * spendable / horizon_s + tolerance_bps
    if not probe(lower):
        return EmpiricalCapability(None, lower, upper, False,
                                   "network unstable under routing load alone",
                                   horizon_s, tuple(probes))
    if probe(upper):
        return EmpiricalCapability(None, lower, upper, False,
                                   "upper bracket did not destabilize the network",
                                   horizon_s, tuple(probes))
    while upper - lower > tolerance_bps and len(probes) < max_probes:
        mid = 0.5 * (lower + upper)
        if probe(mid):
            lower = mid
        else:
            upper = mid
    return EmpiricalCapability(0.5 * (lower + upper), lower, upper, True, "converged",
                               horizon_s, tuple(probes))


# ---------------------------------------------------------------------------
# operation / recovery / efficiency


def its_operation_time(trace: TraceLog) -> float | None:
    """Time of the first link break; None while the network is stable."""
    broke = trace.first_break()
    return broke[0] if broke else None


def its_operation_time_fluid(scenario: Scenario, demand_bps: float | None = None) -> float | None:
    """Deterministic fluid-model operation time: for every overloaded
    link, spendable pool over net drain rate; the minimum binds."""
    if demand_bps is None:
        profile = scenario.traffic_profile()
        demand_bps = profile.rate_per_pair
    topology = load_topology(scenario)
    loads = link_loads(scenario)
    overhead = routing_overhead_bps(scenario)
    best = None
    for link_id, link in sorted(topology.links.items()):
        drain = loads[link_id] * demand_bps + overhead[link_id] - link.r_k
        if drain > 0:
            t = (link.pool_initial - link.threshold) / drain
            best = t if best is None else min(best, t)
    return best


def pools_at_first_break(trace: TraceLog) -> dict[str, float] | None:
    """Pool levels snapshotted at the first break instant."""
    broke = trace.first_break()
    if broke is None:
        return None
    t_break = broke[0]
    pools: dict[str, float] = {}
    for time, link_id, pool in trace.pool_samples:
        if time == t_break and link_id not in pools:
            pools[link_id] = pool
    return pools


def its_recovery_time(
    pools: dict[str, float],
    rates: dict[str, float],
    pool_initial: dict[str, float],
) -> float:
    """Time for every pool to refill to its initial level: the largest
    per-link deficit over generation rate (infinite if a deficient link
    generates nothing)."""
    worst = 0.0
    for link_id in sorted(pools):
        deficit = pool_initial[link_id] - pools[link_id]
        if deficit <= 0:
            continue
        if rates[link_id] <= 0:
            return math.inf
        worst = max(worst, deficit / rates[link_id])
    return worst


def its_efficiency(operation_time_s: float | None, recovery_time_s: float) -> float:
    """Stable-operation duty cycle. A stable network (no exhaustion,
    nothing to recover) has efficiency 1."""
    if operation_time_s is None or recovery_time_s == 0.0:
        return 1.0
    if math.isinf(recovery_time_s):
        return 0.0
    return operation_time_s / (operation_time_s + recovery_time_s)


# ---------------------------------------------------------------------------
# run summary


def summarize(trace: TraceLog, scenario: Scenario) -> dict:
    """Scalar indicator summary of one run. Deterministic in the trace
    and scenario, so re-analyzing a written trace reproduces it."""
    topology = load_topology(scenario)
    rates = {link_id: link.r_k for link_id, link in topology.links.items()}
    initial = {link_id: link.pool_initial for link_id, link in topology.links.items()}

    counts = {DELIVERED: 0, DROP_NO_ROUTE: 0, DROP_NO_KEY: 0, IN_FLIGHT: 0}
    injected: dict[str, int] = {}
    delivered: dict[str, int] = {}
    delivered_bits: dict[str, float] = {}
    owd_sum: dict[str, float] = {}
    eligible_cutoff = trace.horizon - trace.max_path_latency
    for packet in trace.packets:
        counts[packet.outcome] += 1
        key = pair_key(packet.source, packet.destination)
        if packet.inject_time <= eligible_cutoff:
            injected[key] = injected.get(key, 0) + 1
        if packet.outcome == DELIVERED:
            delivered[key] = delivered.get(key, 0) + 1
            delivered_bits[key] = delivered_bits.get(key, 0.0) + packet.bits
            owd_sum[key] = owd_sum.get(key, 0.0) + (packet.end_time - packet.inject_time)

    pdr = {key: delivered.get(key, 0) / n for key, n in sorted(injected.items()) if n > 0}
    owd_mean = {key: owd_sum[key] / delivered[key] for key in sorted(owd_sum)}
    throughput = {key: bits / trace.horizon for key, bits in sorted(delivered_bits.items())}

    routing_bits_per_link: dict[str, float] = {link_id: 0.0 for link_id in sorted(rates)}
    for _time, link_id, bits in trace.routing:
        routing_bits_per_link[link_id] += bits
    routing_bits_total = sum(routing_bits_per_link[k] for k in sorted(routing_bits_per_link))

    operation_time = its_operation_time(trace)
    broke = trace.first_break()
    if broke is None:
        recovery_time = 0.0
    else:
        pools = pools_at_first_break(trace)
        recovery_time = its_recovery_time(pools, rates, initial)
    efficiency = its_efficiency(operation_time, recovery_time)
    capability = capability_analytic_for(scenario)

    return {
        "counts": {
            "injected": len(trace.packets),
            "delivered": counts[DELIVERED],
            "dropped_no_route": counts[DROP_NO_ROUTE],
            "dropped_insufficient_key": counts[DROP_NO_KEY],
            "in_flight": counts[IN_FLIGHT],
        },
        "pdr": pdr,
        "owd_mean_s": owd_mean,
        "throughput_bps": throughput,
        "rcost_bps": routing_bits_total / trace.horizon,
        "routing_bits_per_link": routing_bits_per_link,
        "first_break": (
            {"time_s": broke[0], "link": broke[1]} if broke is not None else None
        ),
        "its": {
            "stable": broke is None,
            "capability_analytic_bps": capability.per_pair_bps if capability else None,
            "bottleneck_link": capability.bottleneck_link if capability else None,
            "operation_time_s": operation_time,
            "operation_time_fluid_s": its_operation_time_fluid(scenario),
            "recovery_time_s": None if math.isinf(recovery_time) else recovery_time,
            "efficiency": efficiency,
        },
    }
