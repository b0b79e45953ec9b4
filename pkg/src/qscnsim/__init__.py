"""Discrete-event simulator for quantum secure communication networks.

Classical traffic is one-time-pad encrypted hop by hop, consuming
per-link key material that QKD devices replenish at a finite,
length-dependent rate; the simulator reports both the classical
indicators and the key-material ones (communication capability,
operation/recovery time, efficiency).
"""

__version__ = "0.1.0"

from .qkd import QkdDeviceParams, SecureRateResult, secure_rate
from .scenario import Scenario, ScenarioError, bundled_scenario_path, load_scenario

__all__ = [
    "QkdDeviceParams",
    "Scenario",
    "ScenarioError",
    "SecureRateResult",
    "bundled_scenario_path",
    "load_scenario",
    "secure_rate",
    "__version__",
]
