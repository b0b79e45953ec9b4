"""Request/response models of the simulation service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ValidateRequest(BaseModel):
    scenario: dict


class ValidateResponse(BaseModel):
    valid: bool = True
    preflight: dict


class RunRequest(BaseModel):
    scenario: dict
    seed: int | None = None
    horizon_s: float | None = Field(default=None, gt=0)
    demand_bps: float | None = Field(default=None, gt=0)
    window_s: float = Field(default=1.0, gt=0)


class RunResponse(BaseModel):
    summary: dict
    trace_csv: str
    pools_csv: str
    indicators_csv: str


class SweepRequest(BaseModel):
    scenario: dict
    seeds: list[int] = Field(min_length=1)
    demands_bps: list[float] | None = None
    horizon_s: float | None = Field(default=None, gt=0)
    window_s: float = Field(default=1.0, gt=0)
    workers: int = Field(default=1, ge=1, le=16)
    include_series: bool = False


class SweepResponse(BaseModel):
    runs: list[dict]


class CapabilityRequest(BaseModel):
    scenario: dict
    tolerance_bps: float = Field(default=500.0, gt=0)
    horizon_s: float | None = Field(default=None, gt=0)
    seed: int = 0


class CapabilityResponse(BaseModel):
    analytic_bps: float | None
    bottleneck_link: str | None
    empirical_bps: float | None
    bracket_bps: list[float]
    conclusive: bool
    reason: str
    horizon_s: float
    probes: list[dict]


class RateTableRequest(BaseModel):
    scenario: dict | None = None  # device defaults are taken from here when given
    device: dict | None = None
    from_km: float = Field(default=0.0, ge=0)
    to_km: float = 200.0
    step_km: float = Field(default=5.0, gt=0)


class RateTableResponse(BaseModel):
    rows: list[dict]
    csv: str


class AnalyzeRequest(BaseModel):
    scenario: dict
    trace_csv: str
    pools_csv: str
    window_s: float = Field(default=1.0, gt=0)
    demand_bps: float | None = Field(default=None, gt=0)
    assertions: list[str] = Field(default_factory=list)


class AnalyzeResponse(BaseModel):
    indicators: dict
    indicators_csv: str
    violations: list[str]


class HealthResponse(BaseModel):
    status: str
    version: str
