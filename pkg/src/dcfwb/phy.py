"""Link budget: distance to SNR-per-bit to BER/PER under Rayleigh fading.

The receive SNR comes from a log-distance path-loss model referenced to
free-space loss at d_0, thermal noise at -174 dBm/Hz plus a noise figure,
and the DSSS processing gain C_s / B_s. Bit error rates are the standard
Rayleigh-average expressions for differential BPSK/QPSK and for CCK
treated as a (2^a)-ary orthogonal alphabet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, log10, pi, sqrt

from .errors import DistanceBelowReference, NegativeGamma
from .scenario import Modulation, RadioParams, RateClass, Scenario

SPEED_OF_LIGHT = 299792458.0   # [m/s]
NOISE_PSD_DBM_HZ = -174.0      # thermal noise density at 290 K


def free_space_ref_loss_db(ref_distance_m: float, carrier_hz: float) -> float:
    """Free-space path loss at the reference distance, in dB."""
    wavelength = SPEED_OF_LIGHT / carrier_hz
    return 20.0 * log10(4.0 * pi * ref_distance_m / wavelength)


def path_loss_db(distance_m: float, radio: RadioParams) -> float:
    """Log-distance path loss PL(d) = PL(d_0) + 10 n_p log10(d / d_0)."""
    if distance_m < radio.ref_distance_m:
        raise DistanceBelowReference(
            f"distance {distance_m} m is below the reference distance "
            f"{radio.ref_distance_m} m"
        )
    ref_loss = radio.ref_loss_db
    if ref_loss is None:
        ref_loss = free_space_ref_loss_db(radio.ref_distance_m, radio.carrier_hz)
    return ref_loss + 10.0 * radio.path_loss_exponent * log10(
        distance_m / radio.ref_distance_m
    )


def rx_power_dbm(distance_m: float, radio: RadioParams) -> float:
    return radio.tx_power_dbm - path_loss_db(distance_m, radio)


def snr_db(distance_m: float, radio: RadioParams) -> float:
    """Mean SNR at the receiver over the full channel bandwidth."""
    noise_dbm = NOISE_PSD_DBM_HZ + 10.0 * log10(radio.bandwidth_hz) \
        + radio.noise_figure_db
    return rx_power_dbm(distance_m, radio) - noise_dbm


def snr_per_bit_db(snr: float, rate_class: RateClass) -> float:
    """Add the spreading gain C_s / B_s to get the mean SNR per bit."""
    return snr + 10.0 * log10(rate_class.chips_per_symbol
                              / rate_class.bits_per_symbol)


def _cck_bit_error_rate(gamma: float, order: int) -> float:
    # Rayleigh-averaged union bound for a 2^order orthogonal alphabet;
    # binomial weights are exact integers before the float division.
    scale = (1 << (order - 1)) / ((1 << order) - 1)
    total = 0.0
    for i in range(1, order):
        term = comb(order - 1, i) / (1.0 + i + i * gamma)
        total += term if i % 2 == 1 else -term
    return scale * total


def bit_error_rate(gamma: float, modulation: Modulation) -> float:
    """Mean BER at linear SNR-per-bit gamma over a Rayleigh channel."""
    if gamma < 0:
        raise NegativeGamma(f"SNR per bit must be >= 0, got {gamma}")
    if modulation is Modulation.DBPSK:
        return 0.5 / (1.0 + gamma)
    if modulation is Modulation.DQPSK:
        g = gamma * sqrt(2.0)
        return 0.5 * (1.0 - sqrt(g / (1.0 + g)))
    if modulation is Modulation.CCK55:
        return _cck_bit_error_rate(gamma, 4)
    if modulation is Modulation.CCK11:
        return _cck_bit_error_rate(gamma, 8)
    raise ValueError(f"unhandled modulation {modulation!r}")


def packet_error_rate(ber: float, payload_bits: int) -> float:
    """PER = 1 - (1 - BER)^n for n independent payload bits."""
    if not 0.0 <= ber <= 1.0:
        raise ValueError(f"bit error rate must lie in [0, 1], got {ber}")
    if payload_bits <= 0:
        raise ValueError(f"payload_bits must be > 0, got {payload_bits}")
    if ber == 1.0:
        return 1.0
    # expm1/log1p form stays accurate for the tiny-BER regime
    return -math.expm1(payload_bits * math.log1p(-ber))


@dataclass(frozen=True)
class LinkBudget:
    """Per-link derived quantities, mostly for reporting."""

    distance_m: float
    rx_power_dbm: float
    snr_db: float
    gamma_db: float     # SNR per bit after spreading gain
    ber: float
    per: float


def link_budget(distance_m: float, radio: RadioParams, rate_class: RateClass,
                payload_bits: int) -> LinkBudget:
    """Evaluate the whole chain from distance to packet error rate."""
    snr = snr_db(distance_m, radio)
    gamma_db = snr_per_bit_db(snr, rate_class)
    gamma = 10.0 ** (gamma_db / 10.0)
    ber = bit_error_rate(gamma, rate_class.modulation)
    per = packet_error_rate(ber, payload_bits)
    return LinkBudget(distance_m, rx_power_dbm(distance_m, radio), snr,
                      gamma_db, ber, per)


def station_error_rates(scenario: Scenario) -> tuple[float, ...]:
    """Packet error rate for each station, in scenario order.

    Stations with fixed_per use it directly; the rest are evaluated
    through the link budget at their configured distance.
    """
    pers = []
    for st in scenario.stations:
        if st.fixed_per is not None:
            pers.append(float(st.fixed_per))
        else:
            rc = scenario.rate_class_by_id(st.rate_class)
            budget = link_budget(st.distance_m, scenario.radio, rc,
                                 scenario.mac.payload_bits)
            pers.append(budget.per)
    return tuple(pers)
