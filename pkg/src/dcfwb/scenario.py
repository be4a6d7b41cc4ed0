"""Scenario configuration: typed parameters, TOML loading, validation.

A scenario bundles everything needed to analyze or simulate one network:
MAC timing constants, radio front-end parameters, the available rate
classes, and the per-station configuration (rate class, traffic, and
either a link distance or a fixed packet error rate).

Scenario files are TOML documents with four tables::

    [mac]            # optional, defaults to 802.11b long-preamble timing
    [radio]          # optional, defaults to the reference radio below
    [[rate_class]]   # optional, defaults to the four 802.11b classes
    [[station]]      # required, one table per station

Unknown keys anywhere are errors: a typo in a parameter name must never
silently fall back to a default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from enum import Enum

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import InvalidScenario, ScenarioFormatError


class Modulation(str, Enum):
    """Modulation schemes of the 802.11b rate classes."""

    DBPSK = "DBPSK"
    DQPSK = "DQPSK"
    CCK55 = "CCK55"
    CCK11 = "CCK11"


@dataclass(frozen=True)
class MacParams:
    """MAC and PHY-framing constants shared by every station."""

    cw_min: int = 32              # W_0, initial contention window
    max_backoff_stage: int = 5    # m, doublings before the window saturates
    slot_time: float = 20e-6      # sigma [s]
    sifs: float = 10e-6           # [s]
    difs: float = 50e-6           # [s]
    eifs: float = 364e-6          # [s], defer after an erroneous reception
    ack_timeout: float = 364e-6   # [s], SIFS + ACK at basic rate + DIFS
    prop_delay: float = 1e-6      # delta [s]
    phy_header_bits: int = 192    # PLCP preamble + header, long format
    mac_header_bits: int = 224
    ack_bits: int = 112
    payload_bits: int = 8224      # 1028 bytes
    basic_rate: float = 1e6       # R_C [bit/s], control/header rate

    @property
    def cw_max(self) -> int:
        """Largest contention window, W_0 * 2^m."""
        return self.cw_min * (1 << self.max_backoff_stage)


@dataclass(frozen=True)
class RateClass:
    """One PHY data rate with its spreading/modulation parameters."""

    id: int
    data_rate: float          # [bit/s]
    chips_per_symbol: int     # C_s
    bits_per_symbol: int      # B_s
    modulation: Modulation
    sensitivity_dbm: float    # receiver sensitivity [dBm]


@dataclass(frozen=True)
class RadioParams:
    """Transmitter power and the propagation model inputs."""

    tx_power_dbm: float = 20.0
    noise_figure_db: float = 10.0
    bandwidth_hz: float = 22e6
    path_loss_exponent: float = 4.0   # n_p
    ref_distance_m: float = 1.0       # d_0
    carrier_hz: float = 2.4e9
    ref_loss_db: float | None = None  # override loss at d_0; free space if None


@dataclass(frozen=True)
class StationConfig:
    """Per-station traffic and channel description.

    Exactly one of distance_m / fixed_per must be set: either the packet
    error rate is derived from the link budget at distance_m, or it is
    pinned directly with fixed_per.
    """

    id: int
    rate_class: int
    lambda_pps: float = 0.0       # packet arrival rate [1/s]
    saturated: bool = False       # if true, always backlogged; lambda ignored
    distance_m: float | None = None
    fixed_per: float | None = None


@dataclass(frozen=True)
class Scenario:
    """A complete, immutable network description."""

    stations: tuple[StationConfig, ...]
    mac: MacParams
    rate_classes: tuple[RateClass, ...]
    radio: RadioParams

    @property
    def n_stations(self) -> int:
        return len(self.stations)

    def rate_class_by_id(self, class_id: int) -> RateClass:
        for rc in self.rate_classes:
            if rc.id == class_id:
                return rc
        raise KeyError(f"rate class {class_id} not declared")

    def class_map(self) -> dict[int, tuple[int, ...]]:
        """Map each declared class id to the station indices using it."""
        groups: dict[int, list[int]] = {rc.id: [] for rc in self.rate_classes}
        for idx, st in enumerate(self.stations):
            groups.setdefault(st.rate_class, []).append(idx)
        return {cid: tuple(idxs) for cid, idxs in groups.items()}

    def station_by_id(self, station_id: int) -> StationConfig:
        for st in self.stations:
            if st.id == station_id:
                return st
        raise KeyError(f"station {station_id} not declared")


def default_mac() -> MacParams:
    """802.11b long-preamble MAC defaults (DSSS, 1028-byte payload)."""
    return MacParams()


def default_radio() -> RadioParams:
    return RadioParams()


def default_rate_classes() -> tuple[RateClass, ...]:
    """The four 802.11b rate classes, slowest first."""
    return (
        RateClass(1, 1e6, 11, 1, Modulation.DBPSK, -85.0),
        RateClass(2, 2e6, 11, 2, Modulation.DQPSK, -82.0),
        RateClass(3, 5.5e6, 8, 4, Modulation.CCK55, -80.0),
        RateClass(4, 11e6, 8, 8, Modulation.CCK11, -76.0),
    )


# ---------------------------------------------------------------------------
# validation

def validate_scenario(scenario: Scenario) -> Scenario:
    """Check every scenario invariant, collecting all violations.

    Returns the scenario unchanged when it is valid; otherwise raises
    InvalidScenario whose message lists every problem found.
    """
    problems: list[str] = []

    if not scenario.stations:
        problems.append("EmptyNetwork: scenario declares no stations")

    mac = scenario.mac
    if mac.cw_min < 1:
        problems.append(f"InvalidField: mac.cw_min must be >= 1, got {mac.cw_min}")
    if mac.max_backoff_stage < 0:
        problems.append(
            "InvalidField: mac.max_backoff_stage must be >= 0, got "
            f"{mac.max_backoff_stage}"
        )
    for name in ("slot_time", "sifs", "difs", "eifs", "ack_timeout"):
        value = getattr(mac, name)
        if value <= 0:
            problems.append(
                f"NonPositiveDuration: mac.{name} must be > 0, got {value}"
            )
    if mac.prop_delay < 0:
        problems.append(
            f"NonPositiveDuration: mac.prop_delay must be >= 0, got {mac.prop_delay}"
        )
    for name in ("phy_header_bits", "mac_header_bits", "ack_bits", "payload_bits"):
        value = getattr(mac, name)
        if value <= 0:
            problems.append(f"InvalidField: mac.{name} must be > 0, got {value}")
    if mac.basic_rate <= 0:
        problems.append(
            f"NonPositiveDuration: mac.basic_rate must be > 0, got {mac.basic_rate}"
        )

    radio = scenario.radio
    if radio.bandwidth_hz <= 0:
        problems.append(
            f"InvalidField: radio.bandwidth_hz must be > 0, got {radio.bandwidth_hz}"
        )
    if radio.carrier_hz <= 0:
        problems.append(
            f"InvalidField: radio.carrier_hz must be > 0, got {radio.carrier_hz}"
        )
    if radio.ref_distance_m <= 0:
        problems.append(
            "InvalidField: radio.ref_distance_m must be > 0, got "
            f"{radio.ref_distance_m}"
        )
    if not 2.0 <= radio.path_loss_exponent <= 6.0:
        problems.append(
            "InvalidField: radio.path_loss_exponent must lie in [2, 6], got "
            f"{radio.path_loss_exponent}"
        )

    class_ids = [rc.id for rc in scenario.rate_classes]
    if not scenario.rate_classes:
        problems.append("InvalidField: scenario declares no rate classes")
    if len(set(class_ids)) != len(class_ids):
        problems.append(f"InvalidField: duplicate rate class ids {class_ids}")
    for rc in scenario.rate_classes:
        if rc.data_rate <= 0:
            problems.append(
                f"NonPositiveDuration: rate class {rc.id} data_rate must be > 0"
            )
        if rc.chips_per_symbol < 1 or rc.bits_per_symbol < 1:
            problems.append(
                f"InvalidField: rate class {rc.id} spreading parameters must be >= 1"
            )
    ordered = sorted(scenario.rate_classes, key=lambda rc: rc.id)
    for lo, hi in zip(ordered, ordered[1:]):
        if hi.data_rate <= lo.data_rate:
            problems.append(
                "InvalidField: data_rate must increase strictly with class id "
                f"(class {lo.id}: {lo.data_rate}, class {hi.id}: {hi.data_rate})"
            )

    known = set(class_ids)
    station_ids = [st.id for st in scenario.stations]
    if len(set(station_ids)) != len(station_ids):
        problems.append(f"InvalidField: duplicate station ids {station_ids}")
    for st in scenario.stations:
        tag = f"station {st.id}"
        if st.rate_class not in known:
            problems.append(
                f"UnknownRateClass: {tag} uses rate class {st.rate_class}, "
                f"declared classes are {sorted(known)}"
            )
        if st.lambda_pps < 0:
            problems.append(
                f"InvalidField: {tag} lambda_pps must be >= 0, got {st.lambda_pps}"
            )
        if not st.saturated and st.lambda_pps == 0:
            # legal (a mute station), nothing to flag
            pass
        has_distance = st.distance_m is not None
        has_per = st.fixed_per is not None
        if has_distance == has_per:
            problems.append(
                f"InvalidField: {tag} must set exactly one of distance_m / fixed_per"
            )
        if has_distance and st.distance_m <= 0:
            problems.append(
                f"InvalidField: {tag} distance_m must be > 0, got {st.distance_m}"
            )
        if has_distance and st.distance_m < radio.ref_distance_m:
            problems.append(
                f"InvalidField: {tag} distance_m {st.distance_m} is below the "
                f"path-loss reference distance {radio.ref_distance_m}"
            )
        if has_per and not 0.0 <= st.fixed_per < 1.0:
            problems.append(
                f"PerOutOfRange: {tag} fixed_per must lie in [0, 1), got "
                f"{st.fixed_per}"
            )

    if problems:
        raise InvalidScenario(problems)
    return scenario


# ---------------------------------------------------------------------------
# TOML parsing

_MAC_FIELDS = {f.name for f in fields(MacParams)}
_RADIO_FIELDS = {f.name for f in fields(RadioParams)}
_CLASS_FIELDS = {f.name for f in fields(RateClass)}
_STATION_FIELDS = {f.name for f in fields(StationConfig)}
_TOP_LEVEL = {"mac", "radio", "rate_class", "station"}

_INT_FIELDS = {
    "cw_min", "max_backoff_stage", "phy_header_bits", "mac_header_bits",
    "ack_bits", "payload_bits", "id", "rate_class", "chips_per_symbol",
    "bits_per_symbol",
}
_BOOL_FIELDS = {"saturated"}


def _check_keys(table: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ScenarioFormatError(
            f"unknown key(s) {unknown} in {where}; allowed: {sorted(allowed)}"
        )


def _coerce(value, key: str, where: str):
    """Map a raw TOML value onto the field's expected Python type."""
    if key == "modulation":
        if not isinstance(value, str):
            raise ScenarioFormatError(f"{where}.modulation must be a string")
        try:
            return Modulation(value)
        except ValueError:
            raise ScenarioFormatError(
                f"{where}.modulation {value!r} is not one of "
                f"{[mod.value for mod in Modulation]}"
            ) from None
    if key in _BOOL_FIELDS:
        if not isinstance(value, bool):
            raise ScenarioFormatError(f"{where}.{key} must be a boolean")
        return value
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioFormatError(f"{where}.{key} must be an integer")
        return value
    # everything else is a float field; TOML integers are accepted
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(f"{where}.{key} must be a number")
    return float(value)


def _build(cls, table: dict, allowed: set[str], required: set[str], where: str):
    _check_keys(table, allowed, where)
    missing = sorted(required - set(table))
    if missing:
        raise ScenarioFormatError(f"missing key(s) {missing} in {where}")
    kwargs = {key: _coerce(value, key, where) for key, value in table.items()}
    return cls(**kwargs)


def parse_scenario(text: str) -> Scenario:
    """Parse a TOML scenario document (structure only, no validation)."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioFormatError(f"TOML parse error: {exc}") from exc

    _check_keys(doc, _TOP_LEVEL, "scenario")

    mac_table = doc.get("mac", {})
    if not isinstance(mac_table, dict):
        raise ScenarioFormatError("[mac] must be a table")
    mac = _build(MacParams, mac_table, _MAC_FIELDS, set(), "[mac]")

    radio_table = doc.get("radio", {})
    if not isinstance(radio_table, dict):
        raise ScenarioFormatError("[radio] must be a table")
    radio = _build(RadioParams, radio_table, _RADIO_FIELDS, set(), "[radio]")

    class_tables = doc.get("rate_class")
    if class_tables is None:
        rate_classes = default_rate_classes()
    else:
        if not isinstance(class_tables, list):
            raise ScenarioFormatError("[[rate_class]] must be an array of tables")
        rate_classes = tuple(
            _build(RateClass, tbl, _CLASS_FIELDS, _CLASS_FIELDS,
                   f"[[rate_class]] #{i + 1}")
            for i, tbl in enumerate(class_tables)
        )

    station_tables = doc.get("station", [])
    if not isinstance(station_tables, list):
        raise ScenarioFormatError("[[station]] must be an array of tables")
    stations = tuple(
        _build(StationConfig, tbl, _STATION_FIELDS, {"id", "rate_class"},
               f"[[station]] #{i + 1}")
        for i, tbl in enumerate(station_tables)
    )

    return Scenario(stations=stations, mac=mac, rate_classes=rate_classes,
                    radio=radio)


def load_scenario(path) -> Scenario:
    """Read, parse, and validate a scenario file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return validate_scenario(parse_scenario(text))


# ---------------------------------------------------------------------------
# TOML serialization (the stdlib has no writer; we emit only what we use)

def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            raise ValueError(f"cannot serialize non-finite float {value}")
        text = repr(value)
        # repr of a whole float is e.g. '1000000.0'; already valid TOML
        return text
    if isinstance(value, Modulation):
        return f'"{value.value}"'
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"cannot serialize {type(value).__name__} to TOML")


def _emit_table(header: str, obj, out: list[str]) -> None:
    out.append(header)
    for f in fields(obj):
        value = getattr(obj, f.name)
        if value is None:
            continue
        out.append(f"{f.name} = {_toml_value(value)}")
    out.append("")


def scenario_to_toml(scenario: Scenario) -> str:
    """Serialize a scenario; parse_scenario() inverts this exactly."""
    out: list[str] = []
    _emit_table("[mac]", scenario.mac, out)
    _emit_table("[radio]", scenario.radio, out)
    for rc in scenario.rate_classes:
        _emit_table("[[rate_class]]", rc, out)
    for st in scenario.stations:
        _emit_table("[[station]]", st, out)
    return "\n".join(out)


def replace_station(scenario: Scenario, station_id: int,
                    **changes) -> Scenario:
    """Return a copy of the scenario with one station's fields replaced."""
    found = False
    stations = []
    for st in scenario.stations:
        if st.id == station_id:
            stations.append(replace(st, **changes))
            found = True
        else:
            stations.append(st)
    if not found:
        raise KeyError(f"station {station_id} not declared")
    return replace(scenario, stations=tuple(stations))
