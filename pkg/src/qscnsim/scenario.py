"""Scenario files: schema, validation and resolved accessors.

Scenarios are JSON documents with explicit unit strings for dimensioned
quantities ("85km", "40Mb", "100kbps", "15s"). Validation reports every
violation with its field path; topology- and device-level invariants
are checked here so a loaded ``Scenario`` is always internally
consistent.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, Literal

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    ValidationError,
    model_validator,
)

from .qkd import QkdDeviceParams
from .traffic import TrafficProfile
from .units import parse_bits, parse_freq_hz, parse_length_km, parse_rate_bps, parse_time_s

LengthKm = Annotated[float, BeforeValidator(parse_length_km)]
Bits = Annotated[float, BeforeValidator(parse_bits)]
RateBps = Annotated[float, BeforeValidator(parse_rate_bps)]
Seconds = Annotated[float, BeforeValidator(parse_time_s)]
Hertz = Annotated[float, BeforeValidator(parse_freq_hz)]


class ScenarioError(ValueError):
    """Scenario file rejected; ``problems`` lists every diagnostic."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DeviceSpec(_StrictModel):
    """QKD device parameters; defaults match a 1 GHz decoy-state system."""

    pulse_rate: Hertz = 1e9
    sifting: float = 0.9
    fiber_loss_db_per_km: float = 0.2
    receiver_efficiency: float = 0.1
    misalignment_error: float = 0.01
    signal_intensity: float = 0.4
    decoy_intensity: float = 0.1
    vacuum_intensity: float = 0.0
    background_rate: float = 2.1e-5
    background_error: float = 0.5
    error_correction_inefficiency: float = 1.15
    signal_pulses: float = 1.6e10
    decoy_pulses: float = 2e9
    vacuum_pulses: float = 2e9
    security_bound: float = 5.73e-7

    @model_validator(mode="after")
    def _check(self) -> "DeviceSpec":
        self.to_params()  # raises ValueError on any device invariant violation
        return self

    def to_params(self) -> QkdDeviceParams:
        return QkdDeviceParams(
            f_req=self.pulse_rate,
            q=self.sifting,
            mu=self.signal_intensity,
            nu=self.decoy_intensity,
            phi=self.vacuum_intensity,
            eta_bob=self.receiver_efficiency,
            e_det=self.misalignment_error,
            y0=self.background_rate,
            e0=self.background_error,
            f_ec=self.error_correction_inefficiency,
            n_mu=self.signal_pulses,
            n_nu=self.decoy_pulses,
            n_phi=self.vacuum_pulses,
            sigma=self.security_bound,
            alpha=self.fiber_loss_db_per_km,
        )


class LinkSpec(_StrictModel):
    id: str
    a: str
    b: str
    length: LengthKm
    pool: Bits = 40e6
    threshold: Bits = 2e6
    device: DeviceSpec | None = None

    @model_validator(mode="after")
    def _check(self) -> "LinkSpec":
        if self.length < 0:
            raise ValueError(f"link {self.id}: length must be >= 0")
        if self.pool <= 0:
            raise ValueError(f"link {self.id}: pool must be positive")
        if not 0 <= self.threshold < self.pool:
            raise ValueError(f"link {self.id}: threshold must be in [0, pool)")
        return self

    @property
    def length_km(self) -> float:
        return self.length

    @property
    def pool_bits(self) -> float:
        return self.pool

    @property
    def threshold_bits(self) -> float:
        return self.threshold


class TrafficSpec(_StrictModel):
    pairs: Literal["all"] | list[tuple[str, str]] = "all"
    packet_size: Bits = 4000
    rate_per_pair: RateBps | None = None
    lambda_per_pair: float | None = None

    @model_validator(mode="after")
    def _check(self) -> "TrafficSpec":
        if (self.rate_per_pair is None) == (self.lambda_per_pair is None):
            raise ValueError("exactly one of rate_per_pair / lambda_per_pair is required")
        if self.packet_size <= 0 or self.packet_size != int(self.packet_size):
            raise ValueError("packet_size must be a positive whole number of bits")
        if self.rate_per_pair is not None and self.rate_per_pair <= 0:
            raise ValueError("rate_per_pair must be positive")
        if self.lambda_per_pair is not None and self.lambda_per_pair <= 0:
            raise ValueError("lambda_per_pair must be positive")
        return self

    def arrival_rate(self) -> float:
        if self.lambda_per_pair is not None:
            return self.lambda_per_pair
        return self.rate_per_pair / self.packet_size


class RoutingSpec(_StrictModel):
    """Update cadence and wire sizes; frozen so measured overhead on the
    reference topology sits near 4 Kbps network-wide."""

    full_dump_period: Seconds = 15.0
    hello_period: Seconds = 1.0
    header_size: Bits = 96
    entry_size: Bits = 96

    @model_validator(mode="after")
    def _check(self) -> "RoutingSpec":
        if self.hello_period <= 0 or self.full_dump_period <= 0:
            raise ValueError("routing periods must be positive")
        ratio = self.full_dump_period / self.hello_period
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("full_dump_period must be a whole multiple of hello_period")
        if self.header_size <= 0 or self.entry_size <= 0:
            raise ValueError("routing message sizes must be positive")
        return self

    @property
    def hello_period_s(self) -> float:
        return self.hello_period

    @property
    def ticks_per_dump(self) -> int:
        return round(self.full_dump_period / self.hello_period)

    @property
    def header_bits(self) -> float:
        return self.header_size

    @property
    def entry_bits(self) -> float:
        return self.entry_size


class EngineSpec(_StrictModel):
    horizon: Seconds = 120.0
    seed: int = 1
    sample_period: Seconds = 0.1
    propagation_us_per_km: float = 5.0
    line_rate: RateBps | None = None  # None: infinite classical capacity
    recovery: Literal["full", "threshold"] = "full"

    @model_validator(mode="after")
    def _check(self) -> "EngineSpec":
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.sample_period <= 0:
            raise ValueError("sample_period must be positive")
        if self.propagation_us_per_km < 0:
            raise ValueError("propagation delay must be >= 0")
        if self.line_rate is not None and self.line_rate <= 0:
            raise ValueError("line_rate must be positive (omit for infinite)")
        return self

    @property
    def horizon_s(self) -> float:
        return self.horizon

    @property
    def sample_period_s(self) -> float:
        return self.sample_period


class Scenario(_StrictModel):
    name: str = "scenario"
    notes: str = ""
    nodes: list[str]
    links: list[LinkSpec]
    device: DeviceSpec = Field(default_factory=DeviceSpec)
    traffic: TrafficSpec
    routing: RoutingSpec = Field(default_factory=RoutingSpec)
    engine: EngineSpec = Field(default_factory=EngineSpec)

    @model_validator(mode="after")
    def _check(self) -> "Scenario":
        if not self.nodes:
            raise ValueError("at least one node is required")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("duplicate node ids")
        node_set = set(self.nodes)
        seen_links: set[str] = set()
        seen_pairs: set[frozenset[str]] = set()
        adjacency: dict[str, set[str]] = {n: set() for n in self.nodes}
        for link in self.links:
            if link.id in seen_links:
                raise ValueError(f"duplicate link id {link.id!r}")
            seen_links.add(link.id)
            if link.a == link.b:
                raise ValueError(f"link {link.id!r} joins {link.a!r} to itself")
            for end in (link.a, link.b):
                if end not in node_set:
                    raise ValueError(f"link {link.id!r} references unknown node {end!r}")
            pair = frozenset((link.a, link.b))
            if pair in seen_pairs:
                raise ValueError(f"parallel link {link.id!r} between {link.a!r} and {link.b!r}")
            seen_pairs.add(pair)
            adjacency[link.a].add(link.b)
            adjacency[link.b].add(link.a)
        if len(self.nodes) > 1:
            seen = {self.nodes[0]}
            frontier = [self.nodes[0]]
            while frontier:
                for neighbor in adjacency[frontier.pop()]:
                    if neighbor not in seen:
                        seen.add(neighbor)
                        frontier.append(neighbor)
            if seen != node_set:
                raise ValueError(f"topology is disconnected: {sorted(node_set - seen)} unreachable")
        if isinstance(self.traffic.pairs, list):
            seen_traffic: set[tuple[str, str]] = set()
            for src, dst in self.traffic.pairs:
                if src not in node_set or dst not in node_set:
                    raise ValueError(f"traffic pair ({src!r}, {dst!r}) references unknown node")
                if src == dst:
                    raise ValueError(f"traffic pair ({src!r}, {dst!r}) is a self-pair")
                if (src, dst) in seen_traffic:
                    raise ValueError(f"duplicate traffic pair ({src!r}, {dst!r})")
                seen_traffic.add((src, dst))
        return self

    # -- resolved accessors -------------------------------------------

    def device_for(self, link_id: str) -> QkdDeviceParams:
        for link in self.links:
            if link.id == link_id:
                spec = link.device if link.device is not None else self.device
                return spec.to_params()
        raise KeyError(f"unknown link {link_id!r}")

    def ordered_pairs(self) -> tuple[tuple[str, str], ...]:
        if self.traffic.pairs == "all":
            ordered = sorted(self.nodes)
            return tuple((a, b) for a in ordered for b in ordered if a != b)
        return tuple(self.traffic.pairs)

    def traffic_profile(self) -> TrafficProfile:
        return TrafficProfile(
            lambda_=self.traffic.arrival_rate(),
            kappa=int(self.traffic.packet_size),
            pairs=self.ordered_pairs(),
        )

    def hop_latency_s(self, length_km: float) -> float:
        latency = self.engine.propagation_us_per_km * 1e-6 * length_km
        if self.engine.line_rate is not None:
            latency += self.traffic.packet_size / self.engine.line_rate
        return latency

    def max_path_latency_s(self) -> float:
        """Upper bound on one packet's end-to-end latency."""
        slowest = max((self.hop_latency_s(link.length_km) for link in self.links), default=0.0)
        return (len(self.nodes) - 1) * slowest

    def with_demand(self, rate_bps: float) -> "Scenario":
        """Copy of this scenario with a different per-pair demand."""
        traffic = self.traffic.model_copy(update={"rate_per_pair": rate_bps, "lambda_per_pair": None})
        return self.model_copy(update={"traffic": traffic})

    def with_seed(self, seed: int) -> "Scenario":
        return self.model_copy(update={"engine": self.engine.model_copy(update={"seed": seed})})

    def digest(self) -> str:
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


def _format_validation_error(err: ValidationError) -> list[str]:
    problems = []
    for issue in err.errors():
        path = ".".join(str(part) for part in issue["loc"]) or "<root>"
        problems.append(f"{path}: {issue['msg']}")
    return problems


def scenario_from_dict(data: dict) -> Scenario:
    """Validate a raw mapping into a Scenario; every violation is
    reported, not just the first."""
    try:
        return Scenario.model_validate(data)
    except ValidationError as err:
        raise ScenarioError(_format_validation_error(err)) from err


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario JSON file."""
    raw = Path(path).read_text()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as err:
        raise ScenarioError([f"{path}: invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}"]) from err
    if not isinstance(data, dict):
        raise ScenarioError([f"{path}: top level must be a JSON object"])
    return scenario_from_dict(data)


def bundled_scenario_path(name: str = "secoqc") -> Path:
    """Path of a scenario shipped with the package."""
    path = Path(__file__).parent / "data" / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return path


def scenario_schema() -> dict:
    """JSON schema of the scenario document."""
    return Scenario.model_json_schema()
