"""Multirate 802.11 DCF throughput model and CSMA/CA simulator.

The analytical side solves the coupled per-station backoff chains for
the network operating point and the resulting aggregate throughput,
covering mixed rates, unsaturated traffic, and channel-error-prone
links. The simulator reproduces the same contention mechanics event by
event so the two can be cross-validated.
"""

__version__ = "0.1.0"

from .errors import (
    DcfwbError,
    DegenerateIdle,
    DegenerateScenario,
    DistanceBelowReference,
    InvalidConfig,
    InvalidScenario,
    NegativeGamma,
    NoConvergence,
    NotConverged,
    PeqOutOfRange,
    ScenarioFormatError,
    UnknownClass,
)
from .scenario import (
    MacParams,
    Modulation,
    RadioParams,
    RateClass,
    Scenario,
    StationConfig,
    default_mac,
    default_radio,
    default_rate_classes,
    load_scenario,
    parse_scenario,
    scenario_to_toml,
    validate_scenario,
)
from .phy import LinkBudget, bit_error_rate, link_budget, packet_error_rate
from .sim import SimConfig, SimStats, estimate_tau, run
from .solver import (
    OperatingPoint,
    SolverOptions,
    SweepAxis,
    ThroughputReport,
    aggregate_throughput,
    solve_operating_point,
    sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
