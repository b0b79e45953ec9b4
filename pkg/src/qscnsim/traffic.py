"""Poisson packet traffic: one renewal stream per ordered node pair.

Inter-packet intervals are exponential (inverse-CDF sampling); every
ordered pair owns an independent, reproducibly seeded random stream so
event generation order never affects the sampled process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Domain tag separating traffic streams from any other consumer of the
# scenario seed.
_TRAFFIC_STREAM_DOMAIN = 0x54524146  # "TRAF"


@dataclass(frozen=True)
class TrafficProfile:
    """Per-pair demand: arrival rate lambda_ (packets/s) and payload
    size kappa (bits) for each ordered (source, destination) pair."""

    lambda_: float
    kappa: int
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if self.lambda_ <= 0:
            raise ValueError(f"arrival rate must be positive, got {self.lambda_}")
        if self.kappa <= 0:
            raise ValueError(f"packet size must be positive, got {self.kappa}")
        for src, dst in self.pairs:
            if src == dst:
                raise ValueError(f"self-pair ({src}, {dst}) is not allowed")

    @property
    def rate_per_pair(self) -> float:
        """Average offered load of one ordered pair in bits/s."""
        return self.lambda_ * self.kappa


@dataclass(frozen=True)
class PacketEvent:
    time: float
    source: str
    destination: str
    size: int


def sample_interval(lambda_: float, u: float) -> float:
    """Inverse-CDF exponential interval: -ln(1 - u) / lambda_.

    ``u`` must lie in [0, 1); u = 1 has no finite preimage and the
    caller should resample.
    """
    if lambda_ <= 0:
        raise ValueError(f"rate must be positive, got {lambda_}")
    if not 0 <= u < 1:
        raise ValueError(f"uniform variate must be in [0, 1), got {u}")
    return -math.log1p(-u) / lambda_


@dataclass
class PairStream:
    """Renewal stream of packets for one ordered pair.

    The stream owns its generator and its own clock; ``next_event``
    advances the clock by one exponential interval.
    """

    source: str
    destination: str
    lambda_: float
    kappa: int
    rng: np.random.Generator
    clock: float = 0.0

    def next_event(self) -> PacketEvent:
        self.clock += sample_interval(self.lambda_, self.rng.random())
        return PacketEvent(self.clock, self.source, self.destination, self.kappa)


def _pair_rng(seed: int, src_index: int, dst_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence((seed, _TRAFFIC_STREAM_DOMAIN, src_index, dst_index))
    return np.random.Generator(np.random.Philox(seq))


def make_streams(profile: TrafficProfile, node_order: list[str], seed: int) -> list[PairStream]:
    """Build one independent stream per ordered pair.

    Stream seeds derive from (seed, pair) only, so adding or removing
    pairs never perturbs the others.
    """
    index = {node: i for i, node in enumerate(node_order)}
    streams = []
    for src, dst in profile.pairs:
        rng = _pair_rng(seed, index[src], index[dst])
        streams.append(PairStream(src, dst, profile.lambda_, profile.kappa, rng))
    return streams
