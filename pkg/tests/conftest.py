"""Shared scenario builders for the test suite."""

from __future__ import annotations

import pytest

from dcfwb.scenario import (
    Scenario,
    StationConfig,
    default_mac,
    default_radio,
    default_rate_classes,
    validate_scenario,
)


def build_scenario(stations, mac=None, rate_classes=None, radio=None,
                   validate=True) -> Scenario:
    scenario = Scenario(
        stations=tuple(stations),
        mac=mac or default_mac(),
        rate_classes=tuple(rate_classes) if rate_classes is not None
        else default_rate_classes(),
        radio=radio or default_radio(),
    )
    return validate_scenario(scenario) if validate else scenario


def saturated_station(station_id, rate_class=4, per=0.0) -> StationConfig:
    return StationConfig(id=station_id, rate_class=rate_class, saturated=True,
                         fixed_per=per)


def uniform_saturated(n, rate_class=4, per=0.0) -> Scenario:
    """n identical backlogged stations of one rate class, fixed PER."""
    return build_scenario(
        saturated_station(i + 1, rate_class, per) for i in range(n)
    )


def anomaly_network(slow_class=1, slow_lambda=8.0, per=0.0,
                    slow_saturated=False, n_fast=9) -> Scenario:
    """n_fast backlogged 11 Mbps stations plus one slow station."""
    stations = [saturated_station(i + 1, 4, per) for i in range(n_fast)]
    stations.append(StationConfig(
        id=n_fast + 1, rate_class=slow_class, lambda_pps=slow_lambda,
        saturated=slow_saturated, fixed_per=per,
    ))
    return build_scenario(stations)


@pytest.fixture
def mac():
    return default_mac()


@pytest.fixture
def rate_classes():
    return default_rate_classes()
