"""FastAPI service wrapping the simulator.

Scenario problems surface as 422 responses whose detail lists every
field-level diagnostic; unexpected failures stay 500s.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__, orchestration
from ..scenario import DeviceSpec, Scenario, ScenarioError, scenario_from_dict, scenario_schema
from . import models

app = FastAPI(
    title="qscnsim",
    version=__version__,
    description="Quantum secure communication network simulator",
)


def _load(raw: dict) -> Scenario:
    try:
        return scenario_from_dict(raw)
    except ScenarioError as err:
        raise HTTPException(status_code=422, detail={"problems": err.problems}) from err


@app.get("/health", response_model=models.HealthResponse)
def health() -> models.HealthResponse:
    return models.HealthResponse(status="ok", version=__version__)


@app.get("/schema")
def schema() -> dict:
    return scenario_schema()


@app.post("/validate", response_model=models.ValidateResponse)
def validate(request: models.ValidateRequest) -> models.ValidateResponse:
    scenario = _load(request.scenario)
    return models.ValidateResponse(preflight=orchestration.preflight(scenario))


@app.post("/run", response_model=models.RunResponse)
def run(request: models.RunRequest) -> models.RunResponse:
    scenario = _load(request.scenario)
    result = orchestration.run_scenario(
        scenario,
        seed=request.seed,
        horizon_s=request.horizon_s,
        demand_bps=request.demand_bps,
        window_s=request.window_s,
    )
    return models.RunResponse(
        summary=result.summary,
        trace_csv=result.trace_csv,
        pools_csv=result.pools_csv,
        indicators_csv=result.indicators_csv,
    )


@app.post("/sweep", response_model=models.SweepResponse)
def sweep(request: models.SweepRequest) -> models.SweepResponse:
    scenario = _load(request.scenario)
    runs = orchestration.sweep(
        scenario,
        seeds=request.seeds,
        demands_bps=request.demands_bps,
        horizon_s=request.horizon_s,
        window_s=request.window_s,
        workers=request.workers,
        include_series=request.include_series,
    )
    return models.SweepResponse(runs=runs)


@app.post("/capability", response_model=models.CapabilityResponse)
def capability(request: models.CapabilityRequest) -> models.CapabilityResponse:
    scenario = _load(request.scenario)
    result = orchestration.capability(
        scenario,
        tolerance_bps=request.tolerance_bps,
        horizon_s=request.horizon_s,
        seed=request.seed,
    )
    return models.CapabilityResponse(**result)


@app.post("/rate-table", response_model=models.RateTableResponse)
def rate_table(request: models.RateTableRequest) -> models.RateTableResponse:
    if request.scenario is not None:
        params = _load(request.scenario).device.to_params()
    else:
        try:
            spec = DeviceSpec.model_validate(request.device or {})
        except ValueError as err:
            raise HTTPException(status_code=422, detail={"problems": [str(err)]}) from err
        params = spec.to_params()
    try:
        rows, csv_text = orchestration.rate_table(
            params, request.from_km, request.to_km, request.step_km)
    except ValueError as err:
        raise HTTPException(status_code=422, detail={"problems": [str(err)]}) from err
    return models.RateTableResponse(rows=rows, csv=csv_text)


@app.post("/analyze", response_model=models.AnalyzeResponse)
def analyze(request: models.AnalyzeRequest) -> models.AnalyzeResponse:
    scenario = _load(request.scenario)
    try:
        indicators, indicators_csv = orchestration.analyze_trace(
            scenario, request.trace_csv, request.pools_csv, request.window_s,
            demand_bps=request.demand_bps)
        violations = orchestration.check_assertions(indicators, request.assertions)
    except ValueError as err:
        raise HTTPException(status_code=422, detail={"problems": [str(err)]}) from err
    return models.AnalyzeResponse(
        indicators=indicators, indicators_csv=indicators_csv, violations=violations)
