"""High-level operations behind the service endpoints: single runs,
seed/demand sweeps, capability search, rate tables and trace analysis.

Every operation returns plain data (dicts and rendered artifact
strings) so the service can hand results straight to clients and the
CLI can write them to disk unchanged.
"""

from __future__ import annotations

import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import artifacts, metrics, qkd
from .engine import Simulation
from .network import load_topology
from .scenario import Scenario


def preflight(scenario: Scenario) -> dict:
    """Resolved per-link key rates plus the derived capability figures,
    computed through the same path the engine uses."""
    topology = load_topology(scenario)
    links = {}
    for link_id in sorted(topology.links):
        link = topology.links[link_id]
        links[link_id] = {
            "endpoints": list(link.endpoints),
            "length_km": link.length_km,
            "r_k_bps": link.r_k,
            "pool_bits": link.pool_initial,
            "threshold_bits": link.threshold,
        }
    capability = metrics.capability_analytic_for(scenario)
    return {
        "name": scenario.name,
        "digest": scenario.digest(),
        "nodes": list(scenario.nodes),
        "pairs": len(scenario.ordered_pairs()),
        "demand_per_pair_bps": scenario.traffic_profile().rate_per_pair,
        "links": links,
        "capability_analytic_bps": capability.per_pair_bps if capability else None,
        "bottleneck_link": capability.bottleneck_link if capability else None,
    }


@dataclass
class RunArtifacts:
    summary: dict
    trace_csv: str
    pools_csv: str
    indicators_csv: str


def _apply_overrides(scenario: Scenario, demand_bps: float | None, seed: int | None) -> Scenario:
    if demand_bps is not None:
        scenario = scenario.with_demand(demand_bps)
    if seed is not None:
        scenario = scenario.with_seed(seed)
    return scenario


def run_scenario(
    scenario: Scenario,
    seed: int | None = None,
    horizon_s: float | None = None,
    demand_bps: float | None = None,
    window_s: float = 1.0,
) -> RunArtifacts:
    """One replication: trace artifacts plus the indicator summary."""
    scenario = _apply_overrides(scenario, demand_bps, seed)
    sim = Simulation(scenario)
    trace = sim.run(horizon=horizon_s)
    trace_csv = artifacts.render_trace(trace)
    pools_csv = artifacts.render_pools(trace)
    indicators_csv = artifacts.render_indicators(metrics.classical_indicators(trace, window_s))
    summary = {
        "run": {
            "scenario": scenario.name,
            "digest": scenario.digest(),
            "seed": sim.seed,
            "horizon_s": trace.horizon,
            "demand_per_pair_bps": scenario.traffic_profile().rate_per_pair,
            "window_s": window_s,
            "trace_sha256": artifacts.sha256_text(trace_csv),
            "links": {
                link_id: {"length_km": link.length_km, "r_k_bps": link.r_k}
                for link_id, link in sorted(sim.topology.links.items())
            },
        },
        "indicators": metrics.summarize(trace, scenario),
    }
    return RunArtifacts(summary, trace_csv, pools_csv, indicators_csv)


def analyze_trace(
    scenario: Scenario,
    trace_csv: str,
    pools_csv: str,
    window_s: float = 1.0,
    demand_bps: float | None = None,
) -> tuple[dict, str]:
    """Recompute indicators from previously written artifacts; equal to
    the originating run's ``summary["indicators"]`` when given the same
    scenario and demand override."""
    if demand_bps is not None:
        scenario = scenario.with_demand(demand_bps)
    trace = artifacts.parse_trace(trace_csv, pools_csv, scenario.max_path_latency_s())
    indicators = metrics.summarize(trace, scenario)
    indicators_csv = artifacts.render_indicators(metrics.classical_indicators(trace, window_s))
    return indicators, indicators_csv


_ASSERT_RE = re.compile(r"^\s*(?P<name>[A-Za-z0-9_.>\-]+?)\s*(?P<op><=|>=|<|>|==)\s*(?P<value>[-+0-9.eE]+)\s*$")

_OPS = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "==": lambda a, b: a == b,
}


def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for key, sub in value.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), sub, out)
    else:
        out[prefix] = value


def check_assertions(indicators: dict, expressions: list[str]) -> list[str]:
    """Evaluate ``name op value`` bounds against the flattened indicator
    summary; returns the violations (empty means all bounds hold)."""
    flat: dict = {}
    _flatten("", indicators, flat)
    violations = []
    for expression in expressions:
        match = _ASSERT_RE.match(expression)
        if match is None:
            raise ValueError(f"cannot parse assertion {expression!r} (expected NAME OP NUMBER)")
        name, op, raw = match.group("name"), match.group("op"), match.group("value")
        if name not in flat:
            known = ", ".join(sorted(flat))
            raise ValueError(f"unknown indicator {name!r}; known: {known}")
        actual = flat[name]
        if actual is None or not _OPS[op](float(actual), float(raw)):
            violations.append(f"{expression}: actual {actual}")
    return violations


def _sweep_one(args: tuple[dict, int, float | None, float | None, float, bool]) -> dict:
    scenario_data, seed, demand_bps, horizon_s, window_s, include_series = args
    scenario = Scenario.model_validate(scenario_data)
    result = run_scenario(scenario, seed=seed, horizon_s=horizon_s,
                          demand_bps=demand_bps, window_s=window_s)
    out = {
        "seed": seed,
        "demand_per_pair_bps": result.summary["run"]["demand_per_pair_bps"],
        "summary": result.summary,
    }
    if include_series:
        out["indicators_csv"] = result.indicators_csv
    return out


def sweep(
    scenario: Scenario,
    seeds: list[int],
    demands_bps: list[float] | None = None,
    horizon_s: float | None = None,
    window_s: float = 1.0,
    workers: int = 1,
    include_series: bool = False,
) -> list[dict]:
    """Independent replications over seeds (and optionally demands).

    Replications share nothing; with ``workers > 1`` they execute in a
    process pool. Results are ordered by (demand, seed) regardless of
    completion order. ``include_series`` attaches each run's per-window
    indicator CSV for plotting.
    """
    demands: list[float | None] = list(demands_bps) if demands_bps else [None]
    jobs = [
        (scenario.model_dump(mode="json"), seed, demand, horizon_s, window_s, include_series)
        for demand in demands
        for seed in seeds
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(job) for job in jobs]


def capability(
    scenario: Scenario,
    tolerance_bps: float,
    horizon_s: float | None = None,
    seed: int = 0,
) -> dict:
    """Analytic capability plus its empirical validation by bisection."""
    analytic = metrics.capability_analytic_for(scenario)
    empirical = metrics.its_capability_empirical(
        scenario, tolerance_bps, horizon_s=horizon_s, seed=seed)
    return {
        "analytic_bps": analytic.per_pair_bps if analytic else None,
        "bottleneck_link": analytic.bottleneck_link if analytic else None,
        "empirical_bps": empirical.per_pair_bps,
        "bracket_bps": [empirical.lower_bps, empirical.upper_bps],
        "conclusive": empirical.conclusive,
        "reason": empirical.reason,
        "horizon_s": empirical.horizon_s,
        "probes": [
            {"demand_bps": p.demand_bps, "stable": p.stable, "first_break_s": p.first_break_s}
            for p in empirical.probes
        ],
    }


def rate_table(
    params: qkd.QkdDeviceParams,
    from_km: float,
    to_km: float,
    step_km: float,
) -> tuple[list[dict], str]:
    """Key rate versus fiber length; returns rows and their CSV form
    (columns length_km, r_per_pulse, r_k)."""
    if step_km <= 0:
        raise ValueError(f"step must be positive, got {step_km}")
    if to_km < from_km:
        raise ValueError("to must be >= from")
    rows = []
    lines = ["length_km,r_per_pulse,r_k"]
    steps = int(round((to_km - from_km) / step_km))
    for i in range(steps + 1):
        length = from_km + i * step_km
        if length > to_km + 1e-9:
            break
        result = qkd.secure_rate(length, params)
        rows.append({"length_km": length, "r_per_pulse": result.r_per_pulse, "r_k": result.r_k})
        lines.append(f"{repr(length)},{repr(result.r_per_pulse)},{repr(result.r_k)}")
    return rows, "\n".join(lines) + "\n"
