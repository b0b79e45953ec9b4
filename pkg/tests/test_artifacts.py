import json

import pytest

from qscnsim import artifacts, engine, metrics
from qscnsim.orchestration import analyze_trace, run_scenario


class TestRoundTrip:
    def test_parse_inverts_render(self, secoqc):
        trace = engine.run(secoqc.with_demand(40e3), seed=8, horizon=12.0)
        trace_csv = artifacts.render_trace(trace)
        pools_csv = artifacts.render_pools(trace)
        parsed = artifacts.parse_trace(trace_csv, pools_csv, secoqc.max_path_latency_s())
        assert parsed.horizon == trace.horizon
        assert len(parsed.packets) == len(trace.packets)
        for original, restored in zip(trace.packets, parsed.packets):
            assert restored.inject_time == original.inject_time
            assert restored.end_time == original.end_time
            assert restored.outcome == original.outcome
            assert restored.hops == original.hops
        assert parsed.routing == trace.routing
        assert parsed.link_events == trace.link_events
        assert parsed.pool_samples == trace.pool_samples

    def test_analysis_reproduces_summary_exactly(self, secoqc):
        result = run_scenario(secoqc, seed=8, horizon_s=12.0, demand_bps=40e3)
        indicators, indicators_csv = analyze_trace(
            secoqc.with_demand(40e3), result.trace_csv, result.pools_csv)
        assert json.dumps(indicators, sort_keys=True) == \
               json.dumps(result.summary["indicators"], sort_keys=True)
        assert indicators_csv == result.indicators_csv

    def test_rejects_foreign_files(self, secoqc):
        with pytest.raises(ValueError, match="header"):
            artifacts.parse_trace("a,b\n1,2\n", "time,link,pool\n", 0.0)
        with pytest.raises(ValueError, match="meta"):
            artifacts.parse_trace(
                ",".join(artifacts.TRACE_HEADER) + "\n", "time,link,pool\n", 0.0)


class TestRenderingDeterminism:
    def test_float_formatting_round_trips(self):
        value = 51.30584611352823
        assert float(artifacts._fmt(value)) == value

    def test_summary_render_sorted_and_stable(self, secoqc):
        result = run_scenario(secoqc, seed=8, horizon_s=5.0, demand_bps=40e3)
        assert artifacts.render_summary(result.summary) == \
               artifacts.render_summary(json.loads(json.dumps(result.summary)))
