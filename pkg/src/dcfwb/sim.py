"""Slot-synchronous discrete-event simulator of the DCF contention cycle.

Time is integer nanoseconds, so every configured duration and frame air
time is exact and simultaneous transmissions are exact integer ties.
Stations run the standard contention loop: draw a backoff from the
current window, decrement once per idle slot, freeze while the medium is
busy, transmit at zero. Collisions keep the medium busy for the longest
involved frame; a sole transmission is lost to a channel error with the
station's packet error probability. Failed attempts double the window up
to its cap and never discard the frame; successes reset the window and
run a post-backoff. Overhearers of a corrupted frame defer for EIFS,
and the grid restarts contention once every station's defer expires.

Determinism: each station owns a `random.Random(seed XOR station id)`
stream, so runs are reproducible bit for bit and adding a station leaves
the other stations' draws untouched.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import InvalidConfig
from .phy import station_error_rates
from .scenario import Scenario, validate_scenario
from .slots import collision_duration, success_duration


@dataclass(frozen=True)
class SimConfig:
    scenario: Scenario
    seed: int
    duration_s: float           # simulated seconds
    warmup_s: float = 0.0       # leading stretch excluded from statistics


@dataclass(frozen=True)
class StationStats:
    station_id: int
    tx_attempts: int
    successes: int
    collisions: int
    channel_errors: int
    delivered_payload_bits: int
    mean_queue_occupancy: float   # fraction of the window with work queued
    eligible_slots: int           # boundaries where a decrement could happen


@dataclass(frozen=True)
class SlotCounts:
    """Channel intervals by kind, counted over the statistics window."""

    idle: int
    success: int
    collision: int
    error: int


@dataclass(frozen=True)
class SimStats:
    per_station: tuple[StationStats, ...]
    slots: SlotCounts
    aggregate_bps: float
    duration_s: float
    warmup_s: float
    seed: int


def _check_config(config: SimConfig) -> None:
    if not isinstance(config.seed, int) or isinstance(config.seed, bool):
        raise InvalidConfig(f"seed must be an integer, got {config.seed!r}")
    if not 0 <= config.seed < 2 ** 64:
        raise InvalidConfig(f"seed must fit in 64 bits, got {config.seed}")
    if config.duration_s <= 0:
        raise InvalidConfig(f"duration must be > 0, got {config.duration_s}")
    if config.warmup_s < 0:
        raise InvalidConfig(f"warmup must be >= 0, got {config.warmup_s}")
    if config.warmup_s >= config.duration_s:
        raise InvalidConfig(
            f"warmup {config.warmup_s} must be shorter than the duration "
            f"{config.duration_s}"
        )
    validate_scenario(config.scenario)


def _ns(seconds: float) -> int:
    return round(seconds * 1e9)


class _Station:
    """Mutable per-station contention state inside one run."""

    __slots__ = (
        "id", "saturated", "lam", "per", "rng", "w0", "max_stage",
        "frame_air_ns", "t_success_ns", "t_fail_ns",
        "queue", "has_frame", "in_backoff", "stage", "counter",
        "next_arrival",
        "attempts", "successes", "collisions", "channel_errors",
        "delivered_bits", "eligible_slots", "occupied_ns",
    )

    def __init__(self, cfg, scenario: Scenario, per: float, seed: int):
        mac = scenario.mac
        rc = scenario.rate_class_by_id(cfg.rate_class)
        self.id = cfg.id
        self.saturated = cfg.saturated
        self.lam = cfg.lambda_pps
        self.per = per
        self.rng = random.Random(seed ^ cfg.id)
        self.w0 = mac.cw_min
        self.max_stage = mac.max_backoff_stage
        header = mac.phy_header_bits / mac.basic_rate
        data = (mac.mac_header_bits + mac.payload_bits) / rc.data_rate
        self.frame_air_ns = _ns(header + data)
        self.t_success_ns = _ns(success_duration(rc, mac))
        self.t_fail_ns = _ns(collision_duration(rc, mac))

        self.queue = 0
        self.has_frame = False
        self.in_backoff = False
        self.stage = 0
        self.counter = 0
        self.next_arrival = None

        self.attempts = 0
        self.successes = 0
        self.collisions = 0
        self.channel_errors = 0
        self.delivered_bits = 0
        self.eligible_slots = 0
        self.occupied_ns = 0

        if self.saturated:
            self.has_frame = True
            self._fresh_backoff()
        elif self.lam > 0:
            self.next_arrival = self._gap_ns()

    def _gap_ns(self) -> int:
        return max(1, _ns(self.rng.expovariate(self.lam)))

    def _fresh_backoff(self) -> None:
        self.stage = 0
        self.counter = self.rng.randrange(self.w0)
        self.in_backoff = True

    def escalate(self) -> None:
        """Failed attempt: double the window (capped), redraw, keep the frame."""
        self.stage = min(self.stage + 1, self.max_stage)
        self.counter = self.rng.randrange(self.w0 << self.stage)

    def finish_success(self) -> None:
        """Deliver the frame, reset to stage 0, and run the post-backoff."""
        self.has_frame = False
        self._fresh_backoff()
        if self.saturated:
            self.has_frame = True
        elif self.queue > 0:
            self.queue -= 1
            self.has_frame = True

    def occupied(self) -> bool:
        return self.has_frame or self.queue > 0


def _count_starts(t0: int, jump: int, sigma: int, warm: int, end: int) -> int:
    """How many of the slots starting at t0, t0+sigma, ... fall in the window."""
    if jump <= 0:
        return 0
    lo = 0 if t0 >= warm else -((t0 - warm) // sigma)
    hi = jump if t0 + (jump - 1) * sigma < end else (end - t0 - 1) // sigma + 1
    return max(0, min(jump, hi) - lo)


def run(config: SimConfig, trace=None) -> SimStats:
    """Simulate the network and return windowed per-station statistics.

    When `trace` is a list, every busy interval inside the statistics
    window is appended as (start_ns, end_ns, kind, station_ids).

    The statistics window is [warmup, duration); an event belongs to the
    window when it starts inside it.
    """
    _check_config(config)
    scenario = config.scenario
    mac = scenario.mac
    pers = station_error_rates(scenario)

    sigma = _ns(mac.slot_time)
    end = _ns(config.duration_s)
    warm = _ns(config.warmup_s)
    eifs_gap_ns = _ns(mac.prop_delay + mac.eifs)
    payload = mac.payload_bits
    stations = [_Station(cfg, scenario, pers[i], config.seed)
                for i, cfg in enumerate(scenario.stations)]
    n = len(stations)

    idle_slots = success_slots = collision_slots = error_slots = 0

    def advance(t0: int, t1: int) -> None:
        # integrate queue-occupancy time over [t0, t1), clipped to the window
        lo = max(t0, warm)
        hi = min(t1, end)
        for st in stations:
            if st.occupied():
                if hi > lo:
                    st.occupied_ns += hi - lo
            elif st.next_arrival is not None and st.next_arrival < hi:
                a = max(st.next_arrival, lo)
                if hi > a:
                    st.occupied_ns += hi - a

    t = 0
    while t < end:
        # frameless post-backoffs that ran out simply end
        for st in stations:
            if st.in_backoff and not st.has_frame and st.counter == 0:
                st.in_backoff = False

        # fold in every arrival due by now
        for st in stations:
            if st.next_arrival is not None:
                while st.next_arrival <= t:
                    st.queue += 1
                    st.next_arrival += st._gap_ns()
                if st.queue > 0 and not st.has_frame:
                    if not st.in_backoff:
                        st._fresh_backoff()
                    st.has_frame = True
                    st.queue -= 1

        transmitters = [st for st in stations
                        if st.in_backoff and st.has_frame and st.counter == 0]
        in_window = t >= warm

        if not transmitters:
            # idle stretch: jump as many whole slots as nothing can change
            counting = [st.counter for st in stations if st.in_backoff]
            pending = [st.next_arrival for st in stations
                       if st.next_arrival is not None and not st.has_frame]
            jump = min(counting) if counting else None
            if pending:
                until_arrival = -((t - min(pending)) // sigma)  # ceil division
                jump = until_arrival if jump is None else min(jump, until_arrival)
            if jump is None:
                jump = -((t - end) // sigma)   # dead air to the finish line
            counted = _count_starts(t, jump, sigma, warm, end)
            idle_slots += counted
            for st in stations:
                if st.in_backoff:
                    st.counter -= jump
                    st.eligible_slots += counted
            advance(t, t + jump * sigma)
            t += jump * sigma
            continue

        if len(transmitters) >= 2:
            busy = max(st.t_fail_ns for st in transmitters)
            if len(transmitters) < n:
                longest_frame = max(st.frame_air_ns for st in transmitters)
                busy = max(busy, longest_frame + eifs_gap_ns)
            for st in transmitters:
                st.escalate()
                if in_window:
                    st.attempts += 1
                    st.collisions += 1
                    st.eligible_slots += 1
            if in_window:
                collision_slots += 1
                if trace is not None:
                    trace.append((t, t + busy, "collision",
                                  tuple(st.id for st in transmitters)))
            advance(t, t + busy)
            t += busy
            continue

        sender = transmitters[0]
        corrupted = sender.rng.random() < sender.per
        if corrupted:
            busy = sender.t_fail_ns
            if n > 1:
                busy = max(busy, sender.frame_air_ns + eifs_gap_ns)
            sender.escalate()
            if in_window:
                sender.attempts += 1
                sender.channel_errors += 1
                sender.eligible_slots += 1
                error_slots += 1
                if trace is not None:
                    trace.append((t, t + busy, "error", (sender.id,)))
            advance(t, t + busy)
        else:
            busy = sender.t_success_ns
            if in_window:
                sender.attempts += 1
                sender.successes += 1
                sender.delivered_bits += payload
                sender.eligible_slots += 1
                success_slots += 1
                if trace is not None:
                    trace.append((t, t + busy, "success", (sender.id,)))
            advance(t, t + busy)
            sender.finish_success()
        t += busy

    window_ns = end - warm
    window_s = window_ns / 1e9
    per_station = tuple(
        StationStats(
            station_id=st.id,
            tx_attempts=st.attempts,
            successes=st.successes,
            collisions=st.collisions,
            channel_errors=st.channel_errors,
            delivered_payload_bits=st.delivered_bits,
            mean_queue_occupancy=st.occupied_ns / window_ns,
            eligible_slots=st.eligible_slots,
        )
        for st in stations
    )
    total_bits = sum(st.delivered_bits for st in stations)
    return SimStats(
        per_station=per_station,
        slots=SlotCounts(idle=idle_slots, success=success_slots,
                         collision=collision_slots, error=error_slots),
        aggregate_bps=total_bits / window_s,
        duration_s=config.duration_s,
        warmup_s=config.warmup_s,
        seed=config.seed,
    )


def estimate_tau(stats: SimStats) -> tuple[float, ...]:
    """Attempts per slot boundary at which the station could have acted.

    Comparable to the model's attempt probability for backlogged
    stations; for lightly loaded stations it is the attempt rate
    conditioned on contending at all.
    """
    return tuple(
        st.tx_attempts / st.eligible_slots if st.eligible_slots else 0.0
        for st in stats.per_station
    )
