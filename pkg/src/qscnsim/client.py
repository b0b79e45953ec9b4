"""HTTP client for the simulation service; the CLI is built on this."""

from __future__ import annotations

import os
from typing import Any

import httpx

DEFAULT_SERVER = "http://127.0.0.1:8731"


class ServiceError(Exception):
    """Service rejected a request or failed; carries the HTTP status
    (0 for transport-level failures) and all diagnostics."""

    def __init__(self, status: int, problems: list[str]):
        self.status = status
        self.problems = problems
        super().__init__(f"service error {status}: " + "; ".join(problems))

    @property
    def is_validation(self) -> bool:
        return self.status in (400, 422)


def default_server() -> str:
    return os.environ.get("QSCNSIM_SERVER", DEFAULT_SERVER)


class ServiceClient:
    def __init__(self, base_url: str | None = None, timeout: float = 3600.0,
                 transport: httpx.BaseTransport | None = None):
        self.base_url = (base_url or default_server()).rstrip("/")
        self._http = httpx.Client(base_url=self.base_url, timeout=timeout, transport=transport)

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _request(self, method: str, path: str, payload: dict | None = None) -> Any:
        try:
            response = self._http.request(method, path, json=payload)
        except httpx.HTTPError as err:
            raise ServiceError(0, [f"cannot reach service at {self.base_url}: {err}"]) from err
        if response.status_code >= 400:
            detail: Any
            try:
                detail = response.json().get("detail")
            except ValueError:
                detail = response.text
            if isinstance(detail, dict) and "problems" in detail:
                problems = [str(p) for p in detail["problems"]]
            elif isinstance(detail, list):
                problems = [str(p) for p in detail]
            else:
                problems = [str(detail)]
            raise ServiceError(response.status_code, problems)
        return response.json()

    def health(self) -> dict:
        return self._request("GET", "/health")

    def schema(self) -> dict:
        return self._request("GET", "/schema")

    def validate(self, scenario: dict) -> dict:
        return self._request("POST", "/validate", {"scenario": scenario})

    def run(self, scenario: dict, seed: int | None = None, horizon_s: float | None = None,
            demand_bps: float | None = None, window_s: float = 1.0) -> dict:
        return self._request("POST", "/run", {
            "scenario": scenario, "seed": seed, "horizon_s": horizon_s,
            "demand_bps": demand_bps, "window_s": window_s,
        })

    def sweep(self, scenario: dict, seeds: list[int], demands_bps: list[float] | None = None,
              horizon_s: float | None = None, window_s: float = 1.0, workers: int = 1,
              include_series: bool = False) -> dict:
        return self._request("POST", "/sweep", {
            "scenario": scenario, "seeds": seeds, "demands_bps": demands_bps,
            "horizon_s": horizon_s, "window_s": window_s, "workers": workers,
            "include_series": include_series,
        })

    def capability(self, scenario: dict, tolerance_bps: float = 500.0,
                   horizon_s: float | None = None, seed: int = 0) -> dict:
        return self._request("POST", "/capability", {
            "scenario": scenario, "tolerance_bps": tolerance_bps,
            "horizon_s": horizon_s, "seed": seed,
        })

    def rate_table(self, scenario: dict | None = None, device: dict | None = None,
                   from_km: float = 0.0, to_km: float = 200.0, step_km: float = 5.0) -> dict:
        return self._request("POST", "/rate-table", {
            "scenario": scenario, "device": device,
            "from_km": from_km, "to_km": to_km, "step_km": step_km,
        })

    def analyze(self, scenario: dict, trace_csv: str, pools_csv: str,
                window_s: float = 1.0, demand_bps: float | None = None,
                assertions: list[str] | None = None) -> dict:
        return self._request("POST", "/analyze", {
            "scenario": scenario, "trace_csv": trace_csv, "pools_csv": pools_csv,
            "window_s": window_s, "demand_bps": demand_bps, "assertions": assertions or [],
        })
