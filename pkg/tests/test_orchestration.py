import pytest

from qscnsim import qkd
from qscnsim.orchestration import check_assertions, rate_table, run_scenario, sweep


class TestAssertions:
    INDICATORS = {
        "rcost_bps": 3700.0,
        "pdr": {"v1->v6": 0.97},
        "its": {"operation_time_s": 51.3, "stable": False, "efficiency": 0.24},
        "counts": {"injected": 100},
    }

    def test_bounds_hold(self):
        violations = check_assertions(self.INDICATORS, [
            "rcost_bps<=5000", "pdr.v1->v6>=0.9", "its.operation_time_s>=40",
            "counts.injected==100",
        ])
        assert violations == []

    def test_violations_reported_with_actuals(self):
        violations = check_assertions(self.INDICATORS, ["pdr.v1->v6>=0.99"])
        assert violations == ["pdr.v1->v6>=0.99: actual 0.97"]

    def test_none_valued_indicator_violates(self):
        violations = check_assertions({"its": {"operation_time_s": None}},
                                      ["its.operation_time_s>=40"])
        assert len(violations) == 1

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="unknown indicator"):
            check_assertions(self.INDICATORS, ["nope>=1"])

    def test_malformed_expression_rejected(self):
        with pytest.raises(ValueError, match="cannot parse"):
            check_assertions(self.INDICATORS, ["rcost_bps ~ 5"])


class TestRateTable:
    def test_columns_and_monotonicity(self, device_params):
        rows, csv_text = rate_table(device_params, 0.0, 120.0, 5.0)
        assert csv_text.splitlines()[0] == "length_km,r_per_pulse,r_k"
        assert len(rows) == 25
        rates = [row["r_k"] for row in rows]
        assert rates == sorted(rates, reverse=True)
        assert rows[17]["length_km"] == 85.0
        assert rows[17]["r_k"] == qkd.secure_rate(85.0, device_params).r_k

    def test_bad_range_rejected(self, device_params):
        with pytest.raises(ValueError):
            rate_table(device_params, 10.0, 0.0, 5.0)
        with pytest.raises(ValueError):
            rate_table(device_params, 0.0, 10.0, 0.0)


class TestSweep:
    def test_matches_individual_runs(self, secoqc):
        runs = sweep(secoqc, seeds=[3, 4], horizon_s=5.0, window_s=1.0)
        solo = run_scenario(secoqc, seed=4, horizon_s=5.0)
        assert runs[1]["summary"]["run"]["trace_sha256"] == solo.summary["run"]["trace_sha256"]
        assert [r["seed"] for r in runs] == [3, 4]
