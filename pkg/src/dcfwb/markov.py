"""Per-station backoff chain: attempt probability under failures and idling.

Each station is modeled as a discrete-time chain over backoff stages
0..m with window W_i = 2^i W_0 (held at stage m on further failures) plus
an idle state entered when the queue empties. A transmission attempt
fails with the equivalent probability P_eq combining collisions and
channel errors; the chain yields the per-slot attempt probability tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateIdle, PeqOutOfRange

PROB_SLACK = 1e-12   # tolerated float excursion outside [0, 1]


def _as_probability(value: float, name: str) -> float:
    """Clamp tiny float excursions; reject anything genuinely outside [0, 1]."""
    if -PROB_SLACK <= value < 0.0:
        return 0.0
    if 1.0 < value <= 1.0 + PROB_SLACK:
        return 1.0
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def failure_probability(p_col: float, p_err: float) -> float:
    """Probability an attempt fails by collision or channel error."""
    p_col = _as_probability(p_col, "p_col")
    p_err = _as_probability(p_err, "p_err")
    return p_col + p_err - p_col * p_err


def _geometric_sum(ratio: float, terms: int) -> float:
    # sum_{i=0}^{terms-1} ratio^i, evaluated termwise so ratio = 1 is exact
    total = 0.0
    power = 1.0
    for _ in range(terms):
        total += power
        power *= ratio
    return total


def chain_normalization(p_eq: float, cw_min: int, max_stage: int) -> float:
    """Normalization constant alpha of the backoff chain.

    alpha = (1/2) [ W_0 (sum_{i<m} (2P)^i + (2P)^m / (1-P)) + 1/(1-P) ],
    written with the geometric sum kept in series form so P = 1/2 needs
    no special casing.
    """
    p_eq = _as_probability(p_eq, "p_eq")
    if p_eq >= 1.0:
        raise PeqOutOfRange("p_eq = 1 leaves the chain without stationary mass")
    doubled = _geometric_sum(2.0 * p_eq, max_stage)
    tail = (2.0 * p_eq) ** max_stage / (1.0 - p_eq)
    return 0.5 * (cw_min * (doubled + tail) + 1.0 / (1.0 - p_eq))


def tau_saturated(p_eq: float, cw_min: int, max_stage: int) -> float:
    """Attempt probability of an always-backlogged station.

    Exact form 2 / ((W_0 + 1) + W_0 P sum_{i<m} (2P)^i); the apparent
    singularity of the textbook expression at P = 1/2 cancels.
    """
    p_eq = _as_probability(p_eq, "p_eq")
    if p_eq >= 1.0:
        raise PeqOutOfRange("p_eq = 1 leaves the chain without stationary mass")
    series = _geometric_sum(2.0 * p_eq, max_stage)
    return 2.0 / ((cw_min + 1.0) + cw_min * p_eq * series)


def tau_unsaturated(q: float, p_eq: float, alpha: float) -> float:
    """Attempt probability when the queue is empty with probability 1 - q.

    tau = (q / (1 - P_eq)) / (q (alpha - 1) + 1); reduces to the
    saturated value at q = 1 and vanishes linearly as q -> 0.
    """
    q = _as_probability(q, "q")
    if p_eq >= 1.0:
        raise PeqOutOfRange("p_eq = 1 leaves the chain without stationary mass")
    if alpha < 1.0:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    return (q / (1.0 - p_eq)) / (q * (alpha - 1.0) + 1.0)


def stationary_split(q: float, alpha: float, p_idle_arrival: float
                     ) -> tuple[float, float]:
    """Stationary mass of the stage-0 head state and of the idle state.

    b_00 = 1 / (alpha + (1 - q) / P_I0) and b_I = b_00 (1 - q) / P_I0,
    where P_I0 is the probability an idle station gets an arrival in a
    slot. At q = 1 the idle state is never entered.
    """
    q = _as_probability(q, "q")
    p_idle_arrival = _as_probability(p_idle_arrival, "p_idle_arrival")
    if q == 1.0:
        return 1.0 / alpha, 0.0
    if p_idle_arrival == 0.0:
        if q == 0.0:
            raise DegenerateIdle(
                "q = 0 with no idle-state arrivals: the station never leaves idle"
            )
        raise DegenerateIdle(
            "idle state absorbs all mass when p_idle_arrival = 0 and q < 1"
        )
    idle_weight = (1.0 - q) / p_idle_arrival
    b_00 = 1.0 / (alpha + idle_weight)
    return b_00, b_00 * idle_weight


def collision_probability(index: int, taus) -> float:
    """Probability station `index` sees at least one other transmitter."""
    prod = 1.0
    for j, tau in enumerate(taus):
        if j != index:
            prod *= 1.0 - _as_probability(tau, f"tau[{j}]")
    return 1.0 - prod


def queue_busy_probability(lambda_pps: float, t_av: float) -> float:
    """Probability a Poisson arrival lands within one average slot.

    q = 1 - exp(-lambda T_av); this is the chain's per-slot chance that
    an empty queue becomes non-empty.
    """
    if lambda_pps < 0:
        raise ValueError(f"lambda_pps must be >= 0, got {lambda_pps}")
    if t_av < 0:
        raise ValueError(f"t_av must be >= 0, got {t_av}")
    return -math.expm1(-lambda_pps * t_av)


@dataclass(frozen=True)
class StationState:
    """Converged per-station operating point quantities."""

    station_id: int
    rate_class: int
    tau: float       # per-slot attempt probability
    p_col: float     # collision probability seen by this station
    p_err: float     # channel packet error rate
    p_eq: float      # combined failure probability
    q: float         # queue-busy probability (1 for saturated stations)
    alpha: float     # backoff-chain normalization
    saturated: bool
