"""Command-line client for the simulation service.

Every data-path subcommand talks to a running service (`qscnsim serve`,
or point --server/QSCNSIM_SERVER elsewhere) and writes the returned
artifacts to disk. Exit codes: 0 success, 1 validation failure,
2 violated assertion bound, 3 internal/transport failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .client import ServiceClient, ServiceError, default_server
from .units import UnitError, parse_rate_bps, parse_time_s

EXIT_VALIDATION = 1
EXIT_ASSERTION = 2
EXIT_INTERNAL = 3


def _fail(code: int, messages: list[str]) -> None:
    for message in messages:
        click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _read_scenario_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as err:
        _fail(EXIT_VALIDATION, [f"cannot read {path}: {err}"])
    except json.JSONDecodeError as err:
        _fail(EXIT_VALIDATION, [f"{path}: invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}"])
    if not isinstance(data, dict):
        _fail(EXIT_VALIDATION, [f"{path}: top level must be a JSON object"])
    return data


def _parse_unit(text: str | None, parser, what: str) -> float | None:
    if text is None:
        return None
    try:
        return parser(text)
    except UnitError as err:
        _fail(EXIT_VALIDATION, [f"bad {what}: {err}"])


def _client(server: str | None) -> ServiceClient:
    return ServiceClient(base_url=server)


def _call(fn):
    try:
        return fn()
    except ServiceError as err:
        _fail(EXIT_VALIDATION if err.is_validation else EXIT_INTERNAL, err.problems)


def _write(directory: Path, name: str, content: str) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / name
    target.write_text(content)
    return target


_server_option = click.option(
    "--server", default=None, metavar="URL",
    help=f"Service base URL (default: $QSCNSIM_SERVER or {default_server()}).",
)


@click.group()
def main() -> None:
    """Quantum secure communication network simulator client."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8731, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Start the simulation service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command()
@click.argument("scenario_file", type=click.Path(exists=False))
@_server_option
def validate(scenario_file: str, server: str | None) -> None:
    """Validate a scenario and print the per-link key-rate preflight."""
    scenario = _read_scenario_file(scenario_file)
    with _client(server) as client:
        response = _call(lambda: client.validate(scenario))
    preflight = response["preflight"]
    click.echo(f"scenario {preflight['name']} ok: {len(preflight['nodes'])} nodes, "
               f"{len(preflight['links'])} links, {preflight['pairs']} traffic pairs")
    for link_id, info in preflight["links"].items():
        click.echo(f"  {link_id} {info['endpoints'][0]}<->{info['endpoints'][1]} "
                   f"{info['length_km']:g} km  r_k = {info['r_k_bps'] / 1e3:.3f} Kbps")
    if preflight["capability_analytic_bps"] is not None:
        click.echo(f"  capability: {preflight['capability_analytic_bps'] / 1e3:.3f} Kbps per pair "
                   f"(bottleneck {preflight['bottleneck_link']})")


@main.command()
@click.argument("scenario_file", type=click.Path(exists=False))
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--horizon", default=None, help="Override the horizon, e.g. 120s.")
@click.option("--demand", default=None, help="Override per-pair demand, e.g. 100kbps.")
@click.option("--window", default="1s", show_default=True, help="Indicator window.")
@click.option("--out", default=".", show_default=True, type=click.Path(file_okay=False),
              help="Directory for summary.json, trace.csv, pools.csv, indicators.csv.")
@_server_option
def run(scenario_file: str, seed: int | None, horizon: str | None, demand: str | None,
        window: str, out: str, server: str | None) -> None:
    """Run one replication and save its artifacts."""
    scenario = _read_scenario_file(scenario_file)
    horizon_s = _parse_unit(horizon, parse_time_s, "horizon")
    demand_bps = _parse_unit(demand, parse_rate_bps, "demand")
    window_s = _parse_unit(window, parse_time_s, "window")
    with _client(server) as client:
        response = _call(lambda: client.run(
            scenario, seed=seed, horizon_s=horizon_s,
            demand_bps=demand_bps, window_s=window_s))
    out_dir = Path(out)
    _write(out_dir, "summary.json", json.dumps(response["summary"], indent=2, sort_keys=True) + "\n")
    _write(out_dir, "trace.csv", response["trace_csv"])
    _write(out_dir, "pools.csv", response["pools_csv"])
    _write(out_dir, "indicators.csv", response["indicators_csv"])
    its = response["summary"]["indicators"]["its"]
    counts = response["summary"]["indicators"]["counts"]
    click.echo(f"run complete: {counts['injected']} packets, {counts['delivered']} delivered")
    if its["stable"]:
        click.echo("network stable over the whole horizon (no key pool exhausted)")
    else:
        recovery = ("never (a drained link generates no key material)"
                    if its["recovery_time_s"] is None else f"{its['recovery_time_s']:.3f} s")
        click.echo(f"first break: {response['summary']['indicators']['first_break']['link']} at "
                   f"{its['operation_time_s']:.3f} s; recovery {recovery}; "
                   f"efficiency {its['efficiency'] * 100:.1f}%")
    click.echo(f"artifacts written to {out_dir}/")


@main.command()
@click.argument("scenario_file", type=click.Path(exists=False))
@click.option("--seeds", default="1", show_default=True, help="Comma-separated seeds.")
@click.option("--demands", default=None, help="Comma-separated demands, e.g. 10kbps,100kbps.")
@click.option("--horizon", default=None, help="Override the horizon.")
@click.option("--window", default="1s", show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--series", is_flag=True, help="Attach per-window indicator series to each run.")
@click.option("--out", default=".", show_default=True, type=click.Path(file_okay=False))
@_server_option
def sweep(scenario_file: str, seeds: str, demands: str | None, horizon: str | None,
          window: str, workers: int, series: bool, out: str, server: str | None) -> None:
    """Run replications over seeds and demands; save sweep.json."""
    scenario = _read_scenario_file(scenario_file)
    try:
        seed_list = [int(s) for s in seeds.split(",") if s.strip()]
    except ValueError:
        _fail(EXIT_VALIDATION, [f"bad --seeds {seeds!r}"])
    demand_list = None
    if demands is not None:
        demand_list = [_parse_unit(d, parse_rate_bps, "demand") for d in demands.split(",") if d.strip()]
    horizon_s = _parse_unit(horizon, parse_time_s, "horizon")
    window_s = _parse_unit(window, parse_time_s, "window")
    with _client(server) as client:
        response = _call(lambda: client.sweep(
            scenario, seeds=seed_list, demands_bps=demand_list,
            horizon_s=horizon_s, window_s=window_s, workers=workers,
            include_series=series))
    target = _write(Path(out), "sweep.json", json.dumps(response, indent=2, sort_keys=True) + "\n")
    click.echo(f"{len(response['runs'])} replications written to {target}")


@main.command()
@click.argument("scenario_file", type=click.Path(exists=False))
@click.option("--tol", default="0.5kbps", show_default=True, help="Bisection tolerance.")
@click.option("--horizon", default=None, help="Stability probe horizon.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default=None, type=click.Path(file_okay=False))
@_server_option
def capability(scenario_file: str, tol: str, horizon: str | None, seed: int,
               out: str | None, server: str | None) -> None:
    """Largest sustainable per-pair demand: analytic and bisected."""
    scenario = _read_scenario_file(scenario_file)
    tolerance_bps = _parse_unit(tol, parse_rate_bps, "tolerance")
    horizon_s = _parse_unit(horizon, parse_time_s, "horizon")
    with _client(server) as client:
        response = _call(lambda: client.capability(
            scenario, tolerance_bps=tolerance_bps, horizon_s=horizon_s, seed=seed))
    if response["analytic_bps"] is not None:
        click.echo(f"analytic:  {response['analytic_bps'] / 1e3:.3f} Kbps per pair "
                   f"(bottleneck {response['bottleneck_link']})")
    if not response["conclusive"]:
        _fail(EXIT_INTERNAL, [f"bisection inconclusive: {response['reason']}"])
    click.echo(f"empirical: {response['empirical_bps'] / 1e3:.3f} Kbps per pair "
               f"(bracket [{response['bracket_bps'][0] / 1e3:.3f}, {response['bracket_bps'][1] / 1e3:.3f}], "
               f"{len(response['probes'])} probes, horizon {response['horizon_s']:.0f} s)")
    if out is not None:
        target = _write(Path(out), "capability.json", json.dumps(response, indent=2, sort_keys=True) + "\n")
        click.echo(f"details written to {target}")


@main.command(name="rate-table")
@click.option("--scenario", "scenario_file", default=None, type=click.Path(),
              help="Scenario supplying device parameters (defaults otherwise).")
@click.option("--from", "from_km", type=float, default=0.0, show_default=True)
@click.option("--to", "to_km", type=float, default=200.0, show_default=True)
@click.option("--step", "step_km", type=float, default=5.0, show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="CSV output path (stdout otherwise).")
@_server_option
def rate_table(scenario_file: str | None, from_km: float, to_km: float, step_km: float,
               out: str | None, server: str | None) -> None:
    """Key generation rate versus fiber length."""
    scenario = _read_scenario_file(scenario_file) if scenario_file else None
    with _client(server) as client:
        response = _call(lambda: client.rate_table(
            scenario=scenario, from_km=from_km, to_km=to_km, step_km=step_km))
    if out is None:
        click.echo(response["csv"], nl=False)
    else:
        Path(out).write_text(response["csv"])
        click.echo(f"{len(response['rows'])} rows written to {out}")


@main.command()
@click.option("--scenario", "scenario_file", required=True, type=click.Path())
@click.option("--trace", "trace_file", required=True, type=click.Path())
@click.option("--pools", "pools_file", required=True, type=click.Path())
@click.option("--window", default="1s", show_default=True)
@click.option("--demand", default=None,
              help="Demand override the trace was produced with, if any.")
@click.option("--assert", "assertions", multiple=True, metavar="EXPR",
              help="Indicator bound such as 'its.operation_time_s>=40'; may repeat.")
@click.option("--out", default=None, type=click.Path(file_okay=False))
@_server_option
def analyze(scenario_file: str, trace_file: str, pools_file: str, window: str,
            demand: str | None, assertions: tuple[str, ...], out: str | None,
            server: str | None) -> None:
    """Recompute indicators from saved trace artifacts."""
    scenario = _read_scenario_file(scenario_file)
    window_s = _parse_unit(window, parse_time_s, "window")
    demand_bps = _parse_unit(demand, parse_rate_bps, "demand")
    try:
        trace_csv = Path(trace_file).read_text()
        pools_csv = Path(pools_file).read_text()
    except OSError as err:
        _fail(EXIT_VALIDATION, [str(err)])
    with _client(server) as client:
        response = _call(lambda: client.analyze(
            scenario, trace_csv, pools_csv, window_s=window_s, demand_bps=demand_bps,
            assertions=list(assertions)))
    if out is not None:
        out_dir = Path(out)
        _write(out_dir, "analysis.json", json.dumps(response["indicators"], indent=2, sort_keys=True) + "\n")
        _write(out_dir, "indicators.csv", response["indicators_csv"])
        click.echo(f"analysis written to {out_dir}/")
    its = response["indicators"]["its"]
    state = "stable" if its["stable"] else f"first break at {its['operation_time_s']:.3f} s"
    click.echo(f"indicators recomputed: {state}; rcost {response['indicators']['rcost_bps'] / 1e3:.3f} Kbps")
    if response["violations"]:
        for violation in response["violations"]:
            click.echo(f"assertion violated: {violation}", err=True)
        sys.exit(EXIT_ASSERTION)


if __name__ == "__main__":
    main()
