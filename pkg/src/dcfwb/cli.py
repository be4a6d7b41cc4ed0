"""Command line interface: analyze, simulate, sweep, ber-curve.

Every command emits CSV (UTF-8, header row, dot decimal separator, units
embedded in column names). When an output path is given, a JSON manifest
with the command, options, seeds, tool version, and timestamp is written
alongside it so any result file can be traced back to its inputs and
reproduced. Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

from . import __version__
from .errors import (
    DegenerateScenario,
    InvalidConfig,
    InvalidScenario,
    NoConvergence,
    NotConverged,
    ScenarioFormatError,
)
from .phy import bit_error_rate
from .scenario import Modulation, load_scenario, replace_station, validate_scenario
from .sim import SimConfig, estimate_tau, run
from .solver import (
    SolverOptions,
    SweepAxis,
    aggregate_throughput,
    apply_axis,
    solve_operating_point,
    sweep,
)
from .svg import Series, line_chart

ANALYZE_COLUMNS = (
    "row", "station_id", "rate_class", "tau", "p_col", "p_err", "p_eq", "q",
    "throughput_bps", "t_av_s", "t_idle_s", "t_success_s", "t_collision_s",
    "t_error_s", "residual", "iterations", "converged",
)
SIMULATE_COLUMNS = (
    "row", "station_id", "tx_attempts", "successes", "collisions",
    "channel_errors", "delivered_payload_bits", "mean_queue_occupancy",
    "tau_estimate", "throughput_bps", "idle_slots", "success_slots",
    "collision_slots", "error_slots",
)
SWEEP_COLUMNS = (
    "rate_class", "grid_index", "grid_value", "source", "throughput_bps",
    "stderr_bps", "status",
)
BER_COLUMNS = ("gamma_db", "ber_dbpsk", "ber_dqpsk", "ber_cck55", "ber_cck11")

AXIS_UNITS = {
    "lambda_pps": "lambda_pps [1/s]",
    "distance_m": "distance_m [m]",
    "fixed_per": "fixed_per [probability]",
    "rate_class": "rate_class [id]",
}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, columns, rows) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_cell(value) for value in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _write_manifest(out_path, command, args, seeds=None) -> None:
    if out_path is None:
        return
    options = {
        key: value for key, value in sorted(vars(args).items())
        if key != "func" and not key.startswith("_")
    }
    manifest = {
        "command": command,
        "tool_version": __version__,
        "scenario": getattr(args, "scenario", None),
        "options": options,
        "seeds": list(seeds) if seeds is not None else None,
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    with open(str(out_path) + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# argument parsing helpers

def parse_grid(spec: str) -> tuple[float, ...]:
    """Grid specs: 'lin:LO:HI:N', 'log:LO:HI:N', or a comma list of numbers."""
    if spec.startswith(("lin:", "log:")):
        kind, *rest = spec.split(":")
        if len(rest) != 3:
            raise ValueError(f"grid spec {spec!r} must be {kind}:LO:HI:COUNT")
        lo, hi, count = float(rest[0]), float(rest[1]), int(rest[2])
        if count < 1:
            raise ValueError(f"grid count must be >= 1, got {count}")
        if count == 1:
            return (lo,)
        if kind == "log":
            if lo <= 0 or hi <= 0:
                raise ValueError("log grids need strictly positive endpoints")
            ratio = (hi / lo) ** (1.0 / (count - 1))
            return tuple(lo * ratio ** i for i in range(count))
        step = (hi - lo) / (count - 1)
        return tuple(lo + step * i for i in range(count))
    values = tuple(float(token) for token in spec.split(",") if token.strip())
    if not values:
        raise ValueError(f"grid spec {spec!r} contains no values")
    return values


def parse_axis(spec: str) -> tuple[SweepAxis, bool]:
    """Parse 'station=ID,param=NAME,grid=SPEC'; returns (axis, log_scale)."""
    fields = {}
    for chunk in spec.split(",", 2):
        if "=" not in chunk:
            raise ValueError(f"axis chunk {chunk!r} is not key=value")
        key, value = chunk.split("=", 1)
        fields[key.strip()] = value.strip()
    missing = {"station", "param", "grid"} - set(fields)
    if missing:
        raise ValueError(f"axis spec is missing {sorted(missing)}")
    axis = SweepAxis(
        station_id=int(fields["station"]),
        param=fields["param"],
        grid=parse_grid(fields["grid"]),
    )
    return axis, fields["grid"].startswith("log:")


def parse_seeds(spec: str) -> tuple[int, ...]:
    """Seed specs: a single integer, 'LO..HI' inclusive, or a comma list."""
    if ".." in spec:
        lo_text, hi_text = spec.split("..", 1)
        lo, hi = int(lo_text), int(hi_text)
        if hi < lo:
            raise ValueError(f"seed range {spec!r} is inverted")
        return tuple(range(lo, hi + 1))
    return tuple(int(token) for token in spec.split(",") if token.strip())


def _solver_options(args) -> SolverOptions:
    return SolverOptions(
        tolerance=args.tolerance,
        max_iterations=args.max_iterations,
        damping=args.damping,
    )


def _add_solver_flags(sub) -> None:
    sub.add_argument("--tolerance", type=float, default=1e-10,
                     help="fixed-point max-norm tolerance (default 1e-10)")
    sub.add_argument("--max-iterations", type=int, default=10000,
                     help="outer iteration cap (default 10000)")
    sub.add_argument("--damping", type=float, default=0.5,
                     help="damping on attempt-probability updates (default 0.5)")


# ---------------------------------------------------------------------------
# worker functions (top level so process pools can pickle them)

def _solve_task(task):
    base, axis, value, options = task
    try:
        varied = apply_axis(base, axis, value)
        report = aggregate_throughput(solve_operating_point(varied, options),
                                      varied)
        return report.aggregate_bps, None
    except Exception as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _sim_task(task):
    base, axis, value, seed, duration, warmup = task
    try:
        varied = apply_axis(base, axis, value)
        stats = run(SimConfig(varied, seed, duration, warmup))
        return stats.aggregate_bps, None
    except Exception as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _run_tasks(worker, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks))


# ---------------------------------------------------------------------------
# commands

def cmd_analyze(args) -> int:
    scenario = load_scenario(args.scenario)
    op = solve_operating_point(scenario, _solver_options(args))
    report = aggregate_throughput(op, scenario)

    rows = []
    for idx, state in enumerate(op.stations):
        rows.append((
            "station", state.station_id, state.rate_class, state.tau,
            state.p_col, state.p_err, state.p_eq, state.q,
            report.per_station_bps[idx],
            None, None, None, None, None, None, None, None,
        ))
    slots = op.slots
    rows.append((
        "aggregate", None, None, None, None, None, None, None,
        report.aggregate_bps, slots.t_av, slots.t_idle, slots.t_success,
        slots.t_collision, slots.t_error, op.residual, op.iterations,
        op.converged,
    ))
    _write_csv(args.out, ANALYZE_COLUMNS, rows)
    _write_manifest(args.out, "analyze", args)
    return 0


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    config = SimConfig(scenario, args.seed, args.duration, args.warmup)
    stats = run(config)
    taus = estimate_tau(stats)
    window = args.duration - args.warmup

    rows = []
    for idx, st in enumerate(stats.per_station):
        rows.append((
            "station", st.station_id, st.tx_attempts, st.successes,
            st.collisions, st.channel_errors, st.delivered_payload_bits,
            st.mean_queue_occupancy, taus[idx],
            st.delivered_payload_bits / window,
            None, None, None, None,
        ))
    totals = stats.per_station
    rows.append((
        "aggregate", None,
        sum(st.tx_attempts for st in totals),
        sum(st.successes for st in totals),
        sum(st.collisions for st in totals),
        sum(st.channel_errors for st in totals),
        sum(st.delivered_payload_bits for st in totals),
        None, None, stats.aggregate_bps,
        stats.slots.idle, stats.slots.success, stats.slots.collision,
        stats.slots.error,
    ))
    _write_csv(args.out, SIMULATE_COLUMNS, rows)
    _write_manifest(args.out, "simulate", args, seeds=[args.seed])
    return 0


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    axis, log_scale = parse_axis(args.axis)
    scenario.station_by_id(axis.station_id)   # KeyError -> exit 2
    options = _solver_options(args)

    if args.classes:
        class_ids = [int(token) for token in args.classes.split(",")
                     if token.strip()]
        declared = {rc.id for rc in scenario.rate_classes}
        unknown = [cid for cid in class_ids if cid not in declared]
        if unknown:
            raise ValueError(f"--classes names undeclared rate classes {unknown}")
    else:
        class_ids = [scenario.station_by_id(axis.station_id).rate_class]

    seeds = parse_seeds(args.seeds) if args.simulate else ()
    if args.simulate and not seeds:
        raise ValueError("--simulate requires at least one seed")

    bases = {}
    for cid in class_ids:
        base = validate_scenario(
            replace_station(scenario, axis.station_id, rate_class=cid))
        bases[cid] = base

    solve_tasks = [(bases[cid], axis, value, options)
                   for cid in class_ids for value in axis.grid]
    solve_results = _run_tasks(_solve_task, solve_tasks, args.jobs)

    sim_results = {}
    if args.simulate:
        sim_tasks = [(bases[cid], axis, value, seed, args.duration,
                      args.warmup)
                     for cid in class_ids for value in axis.grid
                     for seed in seeds]
        flat = _run_tasks(_sim_task, sim_tasks, args.jobs)
        per_point = len(seeds)
        points = [(cid, index) for cid in class_ids
                  for index in range(len(axis.grid))]
        for i, key in enumerate(points):
            sim_results[key] = flat[i * per_point:(i + 1) * per_point]

    rows = []
    analytic_series = {cid: Series(label=f"class {cid} analytic")
                       for cid in class_ids}
    sim_series = {cid: Series(label=f"class {cid} simulated", line=False,
                              marker=True)
                  for cid in class_ids}
    any_ok = False
    result_iter = iter(solve_results)
    for cid in class_ids:
        for index, value in enumerate(axis.grid):
            bps, error = next(result_iter)
            if error is None:
                any_ok = True
                rows.append((cid, index, value, "analytic", bps, None, "ok"))
                analytic_series[cid].xs.append(value)
                analytic_series[cid].ys.append(bps)
            else:
                rows.append((cid, index, value, "analytic", None, None, error))
            if args.simulate:
                outcomes = sim_results[(cid, index)]
                values = [v for v, err in outcomes if err is None]
                errors = [err for v, err in outcomes if err is not None]
                if values:
                    any_ok = True
                    mean = statistics.fmean(values)
                    stderr = (statistics.stdev(values) / len(values) ** 0.5
                              if len(values) > 1 else None)
                    rows.append((cid, index, value, "simulated", mean, stderr,
                                 "ok"))
                    sim_series[cid].xs.append(value)
                    sim_series[cid].ys.append(mean)
                else:
                    rows.append((cid, index, value, "simulated", None, None,
                                 errors[0]))

    _write_csv(args.out, SWEEP_COLUMNS, rows)
    _write_manifest(args.out, "sweep", args, seeds=seeds or None)

    if args.svg:
        series = [analytic_series[cid] for cid in class_ids]
        if args.simulate:
            series += [sim_series[cid] for cid in class_ids]
        chart = line_chart(
            [s for s in series if s.xs],
            xlabel=AXIS_UNITS.get(axis.param, axis.param),
            ylabel="aggregate throughput [bit/s]",
            title=f"station {axis.station_id} sweep over {axis.param}",
            log_x=log_scale,
        )
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(chart)
        _write_manifest(args.svg, "sweep", args, seeds=seeds or None)

    return 0 if any_ok else 3


def cmd_ber_curve(args) -> int:
    if args.gamma_max_db < args.gamma_min_db:
        raise ValueError(
            f"gamma range is inverted: {args.gamma_min_db} .. {args.gamma_max_db}"
        )
    if args.points < 1:
        raise ValueError(f"--points must be >= 1, got {args.points}")
    if args.points == 1:
        grid = [args.gamma_min_db]
    else:
        step = (args.gamma_max_db - args.gamma_min_db) / (args.points - 1)
        grid = [args.gamma_min_db + step * i for i in range(args.points)]

    mods = (Modulation.DBPSK, Modulation.DQPSK, Modulation.CCK55,
            Modulation.CCK11)
    rows = []
    for gamma_db in grid:
        gamma = 10.0 ** (gamma_db / 10.0)
        rows.append((gamma_db,) + tuple(bit_error_rate(gamma, mod)
                                        for mod in mods))
    _write_csv(args.out, BER_COLUMNS, rows)
    _write_manifest(args.out, "ber-curve", args)

    if args.svg:
        series = []
        for column, mod in enumerate(mods, start=1):
            series.append(Series(
                label=mod.value,
                xs=[row[0] for row in rows],
                ys=[row[column] for row in rows],
            ))
        chart = line_chart(series, xlabel="SNR per bit [dB]",
                           ylabel="mean bit error rate [probability]",
                           title="Rayleigh-channel BER")
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(chart)
        _write_manifest(args.svg, "ber-curve", args)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcfwb",
        description="Multirate DCF throughput model and CSMA/CA simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser(
        "analyze",
        help="solve the analytical operating point of a scenario",
        epilog="CSV columns: " + ", ".join(ANALYZE_COLUMNS),
    )
    analyze.add_argument("--scenario", required=True, help="scenario TOML path")
    analyze.add_argument("--out", help="CSV output path (default: stdout)")
    _add_solver_flags(analyze)
    analyze.set_defaults(func=cmd_analyze)

    simulate = sub.add_parser(
        "simulate",
        help="run the discrete-event simulator once",
        epilog=(
            "CSV columns: " + ", ".join(SIMULATE_COLUMNS)
            + ". Station rows report per-station counters over the window; "
              "the aggregate row adds channel slot counts by kind."
        ),
    )
    simulate.add_argument("--scenario", required=True)
    simulate.add_argument("--seed", type=int, default=1)
    simulate.add_argument("--duration", type=float, required=True,
                          help="simulated seconds")
    simulate.add_argument("--warmup", type=float, default=0.0,
                          help="leading seconds excluded from statistics")
    simulate.add_argument("--out", help="CSV output path (default: stdout)")
    simulate.set_defaults(func=cmd_simulate)

    sweep_cmd = sub.add_parser(
        "sweep",
        help="sweep one station parameter over a grid",
        epilog="CSV columns: " + ", ".join(SWEEP_COLUMNS),
    )
    sweep_cmd.add_argument("--scenario", required=True)
    sweep_cmd.add_argument(
        "--axis", required=True,
        help="station=ID,param=NAME,grid=SPEC with NAME one of lambda_pps, "
             "distance_m, fixed_per, rate_class and SPEC lin:LO:HI:N, "
             "log:LO:HI:N, or V1,V2,...",
    )
    sweep_cmd.add_argument(
        "--classes",
        help="comma list of rate-class ids; replicates the sweep with the "
             "swept station moved to each class",
    )
    sweep_cmd.add_argument("--simulate", action="store_true",
                           help="also simulate every grid point")
    sweep_cmd.add_argument("--seeds", default="1..5",
                           help="seeds for --simulate: N, LO..HI, or a list")
    sweep_cmd.add_argument("--duration", type=float, default=30.0,
                           help="simulated seconds per seed (with --simulate)")
    sweep_cmd.add_argument("--warmup", type=float, default=1.0,
                           help="simulated warmup seconds (with --simulate)")
    sweep_cmd.add_argument("--svg", help="also render an SVG line chart here")
    sweep_cmd.add_argument("--jobs", type=int, default=1,
                           help="worker processes for grid points and seeds")
    sweep_cmd.add_argument("--out", help="CSV output path (default: stdout)")
    _add_solver_flags(sweep_cmd)
    sweep_cmd.set_defaults(func=cmd_sweep)

    ber = sub.add_parser(
        "ber-curve",
        help="tabulate BER vs SNR-per-bit for the four modulations",
        epilog="CSV columns: " + ", ".join(BER_COLUMNS),
    )
    ber.add_argument("--gamma-min-db", type=float, default=-5.0)
    ber.add_argument("--gamma-max-db", type=float, default=30.0)
    ber.add_argument("--points", type=int, default=71)
    ber.add_argument("--svg", help="also render an SVG line chart here")
    ber.add_argument("--out", help="CSV output path (default: stdout)")
    ber.set_defaults(func=cmd_ber_curve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (ScenarioFormatError, InvalidScenario, InvalidConfig, KeyError,
            ValueError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 2
    except (NoConvergence, DegenerateScenario, NotConverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
