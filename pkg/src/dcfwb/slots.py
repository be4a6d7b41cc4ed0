"""Slot taxonomy: what one contention slot holds and how long it lasts.

A slot boundary resolves into exactly one of: an idle slot, a success by
one station, a collision (charged to the slowest class involved, whose
frame dominates the busy period), or a single transmission lost to a
channel error. The probabilities below partition unity; the expected
durations combine into the mean slot time that paces every station.

Classes with a lower id are slower by construction (validation enforces
data_rate strictly increasing with id), so "slower than r" is "id < r".
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnknownClass
from .scenario import MacParams, RateClass, Scenario


def busy_probability(taus) -> float:
    """Probability at least one station transmits in a slot."""
    prod = 1.0
    for tau in taus:
        prod *= 1.0 - tau
    return 1.0 - prod


def success_probability(index: int, taus) -> float:
    """Probability station `index` transmits while everyone else is silent."""
    prod = 1.0
    for j, tau in enumerate(taus):
        if j != index:
            prod *= 1.0 - tau
    return taus[index] * prod


def success_duration(rate_class: RateClass, mac: MacParams) -> float:
    """Busy time of a successful exchange, data frame through ACK plus DIFS."""
    header = mac.phy_header_bits / mac.basic_rate
    data = (mac.mac_header_bits + mac.payload_bits) / rate_class.data_rate
    ack = (mac.phy_header_bits + mac.ack_bits) / mac.basic_rate
    return (header + data + mac.prop_delay
            + mac.sifs + ack + mac.prop_delay + mac.difs)


def collision_duration(rate_class: RateClass, mac: MacParams) -> float:
    """Busy time of a failed attempt: the frame air time plus ACK timeout."""
    header = mac.phy_header_bits / mac.basic_rate
    data = (mac.mac_header_bits + mac.payload_bits) / rate_class.data_rate
    return header + data + mac.ack_timeout


def _none_transmit(indices, taus) -> float:
    prod = 1.0
    for i in indices:
        prod *= 1.0 - taus[i]
    return prod


def intra_class_collision_probability(class_id: int, taus, class_map) -> float:
    """Probability of a collision entirely within class `class_id`.

    At least two stations of the class transmit and every other station
    stays silent.
    """
    if class_id not in class_map:
        raise UnknownClass(f"class {class_id} not in class map")
    members = class_map[class_id]
    others = [i for cid, idxs in class_map.items() if cid != class_id
              for i in idxs]
    silent_members = _none_transmit(members, taus)
    exactly_one = sum(success_probability_within(i, members, taus)
                      for i in members)
    # rounding can leave a tiny negative when the event is impossible
    at_least_two = max(0.0, 1.0 - silent_members - exactly_one)
    return at_least_two * _none_transmit(others, taus)


def success_probability_within(index: int, members, taus) -> float:
    """One given member transmits, the other members are silent."""
    prod = 1.0
    for i in members:
        if i != index:
            prod *= 1.0 - taus[i]
    return taus[index] * prod


def inter_class_collision_probability(class_id: int, taus, class_map) -> float:
    """Probability of a cross-class collision charged to class `class_id`.

    Someone in the class transmits, someone in a faster class transmits,
    and every slower class is silent, so this class's frame is the
    longest on the air.
    """
    if class_id not in class_map:
        raise UnknownClass(f"class {class_id} not in class map")
    members = class_map[class_id]
    faster = [i for cid, idxs in class_map.items() if cid > class_id
              for i in idxs]
    slower = [i for cid, idxs in class_map.items() if cid < class_id
              for i in idxs]
    some_member = 1.0 - _none_transmit(members, taus)
    some_faster = 1.0 - _none_transmit(faster, taus)
    return some_member * some_faster * _none_transmit(slower, taus)


@dataclass(frozen=True)
class SlotBreakdown:
    """Expected composition of one contention slot."""

    p_busy: float
    t_idle: float                                   # [s]
    t_success: float                                # [s]
    t_collision: float                              # [s]
    t_error: float                                  # [s]
    success_probs: tuple[float, ...]                # P_s per station
    collision_probs: tuple[tuple[int, float], ...]  # (class id, P_c)

    @property
    def t_av(self) -> float:
        """Mean slot duration, the exact sum of the four components."""
        return self.t_idle + self.t_success + self.t_collision + self.t_error


def slot_breakdown(scenario: Scenario, taus, pers) -> SlotBreakdown:
    """Evaluate the full slot partition for given attempt probabilities.

    `taus` and `pers` are per-station, in scenario order. The identity
    (1 - p_busy) + sum(P_s) + sum(P_c) = 1 holds to rounding error.
    """
    mac = scenario.mac
    class_map = scenario.class_map()

    p_busy = busy_probability(taus)
    t_idle = (1.0 - p_busy) * mac.slot_time

    t_success = 0.0
    t_error = 0.0
    success_probs = []
    for idx, st in enumerate(scenario.stations):
        rc = scenario.rate_class_by_id(st.rate_class)
        p_s = success_probability(idx, taus)
        success_probs.append(p_s)
        t_success += p_s * (1.0 - pers[idx]) * success_duration(rc, mac)
        t_error += p_s * pers[idx] * collision_duration(rc, mac)

    t_collision = 0.0
    collision_probs = []
    for cid in sorted(class_map):
        p_c = (intra_class_collision_probability(cid, taus, class_map)
               + inter_class_collision_probability(cid, taus, class_map))
        collision_probs.append((cid, p_c))
        rc = scenario.rate_class_by_id(cid)
        t_collision += p_c * collision_duration(rc, mac)

    return SlotBreakdown(
        p_busy=p_busy,
        t_idle=t_idle,
        t_success=t_success,
        t_collision=t_collision,
        t_error=t_error,
        success_probs=tuple(success_probs),
        collision_probs=tuple(collision_probs),
    )
