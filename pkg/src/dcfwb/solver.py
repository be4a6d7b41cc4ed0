"""Coupled fixed point for the network operating point, and throughput.

The per-station attempt probabilities, collision probabilities, queue
occupancy factors, and the mean slot time form a nonlinear system: tau
depends on the failure probability and (for unsaturated stations) on q,
q depends on the mean slot time, and the slot time depends on every tau.
It is solved by damped successive substitution: an inner loop settles
(tau, p_col) at a frozen (q, T_av), an outer loop refreshes T_av and q.
Each solve starts cold from the zero-contention closed form so results
are reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import phy
from .errors import DegenerateScenario, NoConvergence, NotConverged
from .markov import (
    StationState,
    chain_normalization,
    collision_probability,
    failure_probability,
    queue_busy_probability,
    tau_saturated,
    tau_unsaturated,
)
from .scenario import Scenario, replace_station, validate_scenario
from .slots import SlotBreakdown, slot_breakdown

P_EQ_CEILING = 1.0 - 1e-9   # beyond this the chain has no stationary mass


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-10      # max-norm over per-station unknowns
    max_iterations: int = 10000   # outer iteration cap
    damping: float = 0.5          # applied to tau updates
    inner_iterations: int = 500   # cap for the (tau, p_col) loop
    stall_window: int = 50        # outer iterations without progress = stall


@dataclass(frozen=True)
class OperatingPoint:
    """Converged network state plus the iteration diagnostics."""

    stations: tuple[StationState, ...]
    slots: SlotBreakdown
    residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ThroughputReport:
    aggregate_bps: float
    per_station_bps: tuple[float, ...]
    t_av: float
    operating_point: OperatingPoint


def _tau_targets(scenario, taus, pers, qs):
    """Fixed-point targets for every station's tau at the current state."""
    mac = scenario.mac
    targets = []
    p_cols = []
    for idx, st in enumerate(scenario.stations):
        p_col = collision_probability(idx, taus)
        p_eq = failure_probability(p_col, pers[idx])
        if p_eq >= P_EQ_CEILING:
            raise DegenerateScenario(
                f"station {st.id}: equivalent failure probability reached "
                f"{p_eq:.12f}; the backoff chain degenerates as p_eq -> 1"
            )
        if st.saturated:
            tau = tau_saturated(p_eq, mac.cw_min, mac.max_backoff_stage)
        else:
            alpha = chain_normalization(p_eq, mac.cw_min, mac.max_backoff_stage)
            tau = tau_unsaturated(qs[idx], p_eq, alpha)
        targets.append(tau)
        p_cols.append(p_col)
    return targets, p_cols


def solve_operating_point(scenario: Scenario, options: SolverOptions | None = None,
                          pers=None) -> OperatingPoint:
    """Solve for the self-consistent (tau, p_col, q, T_av) of a network.

    `pers` optionally supplies precomputed per-station packet error
    rates; by default they come from each station's channel description.

    Raises NoConvergence when the budget runs out and DegenerateScenario
    when some station's failure probability collapses to 1.
    """
    opts = options or SolverOptions()
    if pers is None:
        pers = phy.station_error_rates(scenario)
    mac = scenario.mac
    n = scenario.n_stations

    tau0 = 2.0 / (mac.cw_min + 1.0)
    taus = [tau0] * n
    t_av = mac.slot_time
    qs = [1.0 if st.saturated
          else queue_busy_probability(st.lambda_pps, t_av)
          for st in scenario.stations]

    damping = opts.damping
    halvings = 0
    best_residual = float("inf")
    since_progress = 0
    residual = float("inf")
    iterations = 0

    for iterations in range(1, opts.max_iterations + 1):
        # inner loop: settle tau and p_col at frozen (q, T_av)
        defect = float("inf")
        for _ in range(opts.inner_iterations):
            targets, _ = _tau_targets(scenario, taus, pers, qs)
            defect = max(abs(t - tau) for t, tau in zip(targets, taus))
            if defect <= opts.tolerance:
                break
            taus = [tau + damping * (t - tau)
                    for tau, t in zip(taus, targets)]

        # outer refresh: T_av from the slot partition, then q
        breakdown = slot_breakdown(scenario, taus, pers)
        q_new = [1.0 if st.saturated
                 else queue_busy_probability(st.lambda_pps, breakdown.t_av)
                 for st in scenario.stations]
        q_shift = max(abs(a - b) for a, b in zip(q_new, qs)) if n else 0.0
        t_shift = abs(breakdown.t_av - t_av) / max(t_av, mac.slot_time)
        qs = q_new
        t_av = breakdown.t_av

        residual = max(defect, q_shift, t_shift)
        if residual <= opts.tolerance:
            return _assemble(scenario, taus, pers, qs, breakdown,
                             residual, iterations, True)

        # stall handling: halve the damping a few times, then give up
        if residual < best_residual * (1.0 - 1e-3):
            best_residual = residual
            since_progress = 0
        else:
            since_progress += 1
            if since_progress >= opts.stall_window:
                if halvings >= 3:
                    raise NoConvergence(residual, iterations)
                damping *= 0.5
                halvings += 1
                since_progress = 0

    raise NoConvergence(residual, iterations)


def _assemble(scenario, taus, pers, qs, breakdown, residual, iterations,
              converged) -> OperatingPoint:
    mac = scenario.mac
    states = []
    for idx, st in enumerate(scenario.stations):
        p_col = collision_probability(idx, taus)
        p_eq = failure_probability(p_col, pers[idx])
        alpha = chain_normalization(p_eq, mac.cw_min, mac.max_backoff_stage)
        states.append(StationState(
            station_id=st.id,
            rate_class=st.rate_class,
            tau=taus[idx],
            p_col=p_col,
            p_err=pers[idx],
            p_eq=p_eq,
            q=qs[idx],
            alpha=alpha,
            saturated=st.saturated,
        ))
    return OperatingPoint(
        stations=tuple(states),
        slots=breakdown,
        residual=residual,
        iterations=iterations,
        converged=converged,
    )


def aggregate_throughput(op: OperatingPoint, scenario: Scenario
                         ) -> ThroughputReport:
    """Payload throughput per station and in aggregate.

    Each station contributes P_s (1 - P_e) PL / T_av; the aggregate is
    their plain sum so the two are consistent by construction.
    """
    if not op.converged:
        raise NotConverged(
            f"operating point residual {op.residual:.3e} after "
            f"{op.iterations} iterations"
        )
    t_av = op.slots.t_av
    payload = scenario.mac.payload_bits
    per_station = tuple(
        op.slots.success_probs[idx] * (1.0 - state.p_err) * payload / t_av
        for idx, state in enumerate(op.stations)
    )
    return ThroughputReport(
        aggregate_bps=sum(per_station),
        per_station_bps=per_station,
        t_av=t_av,
        operating_point=op,
    )


# ---------------------------------------------------------------------------
# parameter sweeps

SWEEP_PARAMS = ("lambda_pps", "distance_m", "fixed_per", "rate_class")


@dataclass(frozen=True)
class SweepAxis:
    station_id: int
    param: str                  # one of SWEEP_PARAMS
    grid: tuple[float, ...]


@dataclass(frozen=True)
class SweepPoint:
    value: float
    report: ThroughputReport | None
    error: str | None


def apply_axis(scenario: Scenario, axis: SweepAxis, value) -> Scenario:
    """Rebuild the scenario with the axis parameter set on its station."""
    if axis.param not in SWEEP_PARAMS:
        raise ValueError(
            f"unknown sweep parameter {axis.param!r}; choose from {SWEEP_PARAMS}"
        )
    if axis.param == "lambda_pps":
        changes = {"lambda_pps": float(value)}
    elif axis.param == "distance_m":
        changes = {"distance_m": float(value), "fixed_per": None}
    elif axis.param == "fixed_per":
        changes = {"fixed_per": float(value), "distance_m": None}
    else:
        changes = {"rate_class": int(value)}
    return validate_scenario(replace_station(scenario, axis.station_id,
                                             **changes))


def sweep(scenario: Scenario, axis: SweepAxis,
          options: SolverOptions | None = None) -> list[SweepPoint]:
    """Solve the model at every grid value, capturing per-point failures.

    Grid order is preserved; a failed point carries the error text and a
    None report instead of aborting the remaining points.
    """
    points = []
    for value in axis.grid:
        try:
            varied = apply_axis(scenario, axis, value)
            op = solve_operating_point(varied, options)
            points.append(SweepPoint(value, aggregate_throughput(op, varied),
                                     None))
        except Exception as exc:  # recorded per point, sweep continues
            points.append(SweepPoint(value, None,
                                     f"{type(exc).__name__}: {exc}"))
    return points
