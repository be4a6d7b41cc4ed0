"""Link budget and error-rate formulas against hand-computed oracles."""

import math
from fractions import Fraction

import pytest

from dcfwb.errors import DistanceBelowReference, NegativeGamma
from dcfwb.phy import (
    NOISE_PSD_DBM_HZ,
    bit_error_rate,
    free_space_ref_loss_db,
    link_budget,
    packet_error_rate,
    path_loss_db,
    rx_power_dbm,
    snr_db,
    snr_per_bit_db,
    station_error_rates,
)
from dcfwb.scenario import (
    Modulation,
    StationConfig,
    default_radio,
    default_rate_classes,
)

from conftest import build_scenario, saturated_station


class TestPathLoss:
    def test_free_space_reference_at_2_4_ghz(self):
        # 20 log10(4 pi / lambda) with lambda = c / 2.4 GHz
        assert free_space_ref_loss_db(1.0, 2.4e9) == pytest.approx(
            40.0520, abs=1e-3)

    def test_log_distance_slope(self):
        radio = default_radio()
        base = path_loss_db(1.0, radio)
        assert path_loss_db(10.0, radio) == pytest.approx(
            base + 10.0 * radio.path_loss_exponent, rel=1e-12)
        assert path_loss_db(20.0, radio) == pytest.approx(92.0932, abs=1e-3)

    def test_ref_loss_override(self):
        radio = default_radio()
        custom = type(radio)(**{**radio.__dict__, "ref_loss_db": 30.0})
        assert path_loss_db(1.0, custom) == 30.0
        assert path_loss_db(10.0, custom) == pytest.approx(70.0, rel=1e-12)

    def test_distance_below_reference_rejected(self):
        with pytest.raises(DistanceBelowReference):
            path_loss_db(0.5, default_radio())


class TestSnr:
    def test_snr_chain_at_20_m(self):
        radio = default_radio()
        assert rx_power_dbm(20.0, radio) == pytest.approx(-72.0932, abs=1e-3)
        noise = NOISE_PSD_DBM_HZ + 10 * math.log10(radio.bandwidth_hz) \
            + radio.noise_figure_db
        assert noise == pytest.approx(-90.5758, abs=1e-3)
        assert snr_db(20.0, radio) == pytest.approx(18.4826, abs=1e-3)

    def test_spreading_gain_per_class(self):
        classes = default_rate_classes()
        assert snr_per_bit_db(10.0, classes[0]) == pytest.approx(
            10.0 + 10 * math.log10(11.0), rel=1e-12)
        assert snr_per_bit_db(10.0, classes[3]) == 10.0   # 8 chips / 8 bits


class TestBitErrorRate:
    def test_dbpsk_closed_form(self):
        assert bit_error_rate(0.0, Modulation.DBPSK) == 0.5
        assert bit_error_rate(1.0, Modulation.DBPSK) == 0.25
        assert bit_error_rate(9.0, Modulation.DBPSK) == 0.05

    def test_dqpsk_value(self):
        # 0.5 (1 - sqrt(x / (1 + x))) with x = sqrt(2)
        expected = 0.5 * (1 - math.sqrt(math.sqrt(2) / (1 + math.sqrt(2))))
        assert bit_error_rate(1.0, Modulation.DQPSK) == pytest.approx(
            expected, rel=1e-12)
        assert expected == pytest.approx(0.1173165676, abs=1e-9)

    def test_cck_at_zero_gamma_exact_rationals(self):
        # alternating binomial sums collapse to 2/5 and 112/255
        assert bit_error_rate(0.0, Modulation.CCK55) == pytest.approx(
            0.4, abs=1e-15)
        assert bit_error_rate(0.0, Modulation.CCK11) == pytest.approx(
            112 / 255, abs=1e-15)

    @pytest.mark.parametrize("modulation,order", [
        (Modulation.CCK55, 4), (Modulation.CCK11, 8)])
    def test_cck_term_by_term_oracle(self, modulation, order):
        # independent evaluation in exact rational arithmetic
        for gamma in (Fraction(1, 2), Fraction(2), Fraction(25, 3)):
            scale = Fraction(2 ** (order - 1), 2 ** order - 1)
            total = sum(
                Fraction((-1) ** (i + 1) * math.comb(order - 1, i),
                         1) / (1 + i + i * gamma)
                for i in range(1, order)
            )
            expected = float(scale * total)
            assert bit_error_rate(float(gamma), modulation) == pytest.approx(
                expected, rel=1e-13)

    @pytest.mark.parametrize("modulation", list(Modulation))
    def test_monotone_decreasing_in_gamma(self, modulation):
        gammas = [10 ** (exp / 20) for exp in range(-40, 81)]
        values = [bit_error_rate(g, modulation) for g in gammas]
        for lo, hi in zip(values, values[1:]):
            assert hi < lo
        assert all(0.0 < v <= 0.5 for v in values)

    def test_negative_gamma_rejected(self):
        with pytest.raises(NegativeGamma):
            bit_error_rate(-0.1, Modulation.DBPSK)


class TestPacketErrorRate:
    def test_boundaries(self):
        assert packet_error_rate(0.0, 8224) == 0.0
        assert packet_error_rate(1.0, 8224) == 1.0

    def test_worst_case_oracle(self):
        assert packet_error_rate(1e-5, 8224) == pytest.approx(
            0.07894950, abs=1e-8)

    def test_matches_direct_power(self):
        for ber in (1e-3, 0.01, 0.3):
            assert packet_error_rate(ber, 1000) == pytest.approx(
                1 - (1 - ber) ** 1000, rel=1e-12)

    def test_tiny_ber_stays_accurate(self):
        # direct 1 - (1-b)^n collapses to 0 here; expm1 keeps the value
        assert packet_error_rate(1e-300, 8224) == pytest.approx(
            8224e-300, rel=1e-9)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            packet_error_rate(1.1, 100)
        with pytest.raises(ValueError):
            packet_error_rate(-0.1, 100)
        with pytest.raises(ValueError):
            packet_error_rate(0.1, 0)


class TestLinkBudget:
    def test_composition_matches_manual_chain(self):
        radio = default_radio()
        rc = default_rate_classes()[0]
        budget = link_budget(8.0, radio, rc, 8224)
        snr = snr_db(8.0, radio)
        gamma_db = snr_per_bit_db(snr, rc)
        ber = bit_error_rate(10 ** (gamma_db / 10), rc.modulation)
        assert budget.snr_db == snr
        assert budget.gamma_db == gamma_db
        assert budget.ber == ber
        assert budget.per == packet_error_rate(ber, 8224)

    def test_station_error_rates_mixes_sources(self):
        scenario = build_scenario([
            saturated_station(1, 4, per=0.08),
            StationConfig(id=2, rate_class=1, saturated=True, distance_m=8.0),
        ])
        pers = station_error_rates(scenario)
        assert pers[0] == 0.08
        rc = default_rate_classes()[0]
        assert pers[1] == link_budget(8.0, scenario.radio, rc, 8224).per
        assert 0.05 < pers[1] < 0.3

    def test_per_grows_with_distance(self):
        scenario_near = build_scenario(
            [StationConfig(id=1, rate_class=4, saturated=True,
                           distance_m=2.0)])
        scenario_far = build_scenario(
            [StationConfig(id=1, rate_class=4, saturated=True,
                           distance_m=4.0)])
        assert station_error_rates(scenario_far)[0] \
            > station_error_rates(scenario_near)[0]
