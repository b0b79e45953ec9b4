"""Trace, pool and indicator serialization.

All writers are byte-deterministic (floats are rendered with ``repr``,
which round-trips exactly), so identical runs produce identical files
and re-reading a trace reproduces every derived indicator bit-for-bit.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json

from .engine import PacketRecord, TraceLog
from .metrics import ClassicalSeries

TRACE_HEADER = ["kind", "time", "src", "dst", "link", "bits", "outcome", "hops", "end"]
POOLS_HEADER = ["time", "link", "pool"]
INDICATORS_HEADER = ["window_end", "metric", "scope", "value"]


def _fmt(value: float | int | str | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_trace(trace: TraceLog) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    writer.writerow(["meta", _fmt(trace.horizon), "", "", "", "", "", "", ""])
    for p in trace.packets:
        writer.writerow([
            "pkt", _fmt(p.inject_time), p.source, p.destination, "",
            p.bits, p.outcome, p.hops, _fmt(p.end_time),
        ])
    for time, link_id, bits in trace.routing:
        writer.writerow(["rt", _fmt(time), "", "", link_id, _fmt(bits), "", "", ""])
    for time, link_id, event in trace.link_events:
        writer.writerow(["link", _fmt(time), "", "", link_id, "", event, "", ""])
    return buf.getvalue()


def render_pools(trace: TraceLog) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(POOLS_HEADER)
    for time, link_id, pool in trace.pool_samples:
        writer.writerow([_fmt(time), link_id, _fmt(pool)])
    return buf.getvalue()


def parse_trace(trace_csv: str, pools_csv: str, max_path_latency: float) -> TraceLog:
    """Rebuild a TraceLog from rendered artifacts.

    ``max_path_latency`` is a scenario property, not a trace row; pass
    ``scenario.max_path_latency_s()``.
    """
    trace = TraceLog(horizon=0.0, max_path_latency=max_path_latency)
    rows = csv.reader(io.StringIO(trace_csv))
    header = next(rows, None)
    if header != TRACE_HEADER:
        raise ValueError("not a trace file: unexpected header")
    for row in rows:
        kind = row[0]
        if kind == "meta":
            trace.horizon = float(row[1])
        elif kind == "pkt":
            record = PacketRecord(row[2], row[3], float(row[1]), int(row[5]))
            record.outcome = row[6]
            record.hops = int(row[7])
            record.end_time = float(row[8]) if row[8] else None
            trace.packets.append(record)
        elif kind == "rt":
            trace.routing.append((float(row[1]), row[4], float(row[5])))
        elif kind == "link":
            trace.link_events.append((float(row[1]), row[4], row[6]))
        else:
            raise ValueError(f"unknown trace row kind {kind!r}")
    if trace.horizon <= 0:
        raise ValueError("trace file is missing its meta row")
    pool_rows = csv.reader(io.StringIO(pools_csv))
    header = next(pool_rows, None)
    if header != POOLS_HEADER:
        raise ValueError("not a pools file: unexpected header")
    for row in pool_rows:
        trace.pool_samples.append((float(row[0]), row[1], float(row[2])))
    return trace


def render_indicators(series: ClassicalSeries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(INDICATORS_HEADER)
    for pair in sorted(series.owd):
        for window_end, value in series.owd[pair]:
            writer.writerow([_fmt(window_end), "owd_s", pair, _fmt(value)])
    for pair in sorted(series.throughput):
        for window_end, value in series.throughput[pair]:
            writer.writerow([_fmt(window_end), "throughput_bps", pair, _fmt(value)])
    for pair in sorted(series.pdr):
        for window_end, value in series.pdr[pair]:
            writer.writerow([_fmt(window_end), "pdr", pair, _fmt(value)])
    for window_end, value in series.rcost:
        writer.writerow([_fmt(window_end), "rcost_bps", "network", _fmt(value)])
    return buf.getvalue()


def render_summary(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()
