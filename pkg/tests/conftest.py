import json

import pytest

from qscnsim.scenario import DeviceSpec, Scenario, bundled_scenario_path, load_scenario


@pytest.fixture(scope="session")
def device_params():
    """Reference device (1 GHz decoy-state system)."""
    return DeviceSpec().to_params()


@pytest.fixture(scope="session")
def secoqc() -> Scenario:
    return load_scenario(bundled_scenario_path())


@pytest.fixture(scope="session")
def secoqc_raw() -> dict:
    return json.loads(bundled_scenario_path().read_text())


def build_scenario(
    nodes,
    links,
    rate_per_pair=50e3,
    pairs="all",
    pool=2e6,
    threshold=1e5,
    horizon=60.0,
    seed=1,
    packet_size=4000,
    **engine_overrides,
) -> Scenario:
    """Small scenario helper for unit tests; links are (id, a, b, length_km)."""
    data = {
        "name": "test",
        "nodes": list(nodes),
        "links": [
            {"id": lid, "a": a, "b": b, "length": length, "pool": pool, "threshold": threshold}
            for lid, a, b, length in links
        ],
        "traffic": {"pairs": pairs, "packet_size": packet_size, "rate_per_pair": rate_per_pair},
        "engine": {"horizon": horizon, "seed": seed, **engine_overrides},
    }
    return Scenario.model_validate(data)


@pytest.fixture
def two_node() -> Scenario:
    return build_scenario(["a", "b"], [("l1", "a", "b", 10.0)], pairs=[("a", "b")])


@pytest.fixture
def three_node_line() -> Scenario:
    return build_scenario(
        ["a", "b", "c"],
        [("l1", "a", "b", 10.0), ("l2", "b", "c", 12.0)],
    )
