"""Deterministic simulator and analytic toolkit for distributed
opportunistic scheduling in slotted single-hop wireless networks."""

from .core import (
    ControllerGains,
    ScenarioConfig,
    ScenarioError,
    TimeBase,
    derive_controller_gains,
    validate_scenario,
)
from .engine import RunResult, simulate_run

__all__ = [
    "ControllerGains",
    "RunResult",
    "ScenarioConfig",
    "ScenarioError",
    "TimeBase",
    "derive_controller_gains",
    "simulate_run",
    "validate_scenario",
]

__version__ = "0.1.0"
