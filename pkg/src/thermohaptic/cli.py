"""Command line entry point: simulate, fit, serve, run studies, plot.

Every subcommand writes its artifacts under --out-dir with fixed names
and fixed number formatting, so running the same command twice yields
byte-identical files. Nothing here prints wall-clock time.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import AppConfig, load_config, parse_clock
from .device.core import INDEX, DeviceConfig, device_tick, initial_device_state
from .device.service import run_service
from .errors import InvalidInputError
from .experiments.metrics import (
    MANIP_CSV_COLUMNS,
    THERMAL_CSV_COLUMNS,
    manip_metrics,
    manip_summary,
    thermal_summary,
    write_json_summary,
    write_manip_csv,
    write_thermal_csv,
)
from .experiments.plans import HAPTIC_FEEDBACK, NO_FEEDBACK, plan_manip, plan_thermal
from .experiments.sessions import run_manip_session, run_thermal_session
from .experiments.subjects import SubjectModel
from .plant.features import StepFeatures, extract_features
from .plant.fitting import fit_thermal_params, simulate_protocol_trace
from .plant.forcemap import DEFAULT_FORCE_MAP, fit_force_map, force_from_pressure
from .plant.traces import (
    FORCE_HEADER,
    TRACE_HEADER,
    read_force_csv,
    read_trace_csv,
    write_force_csv,
    write_trace_csv,
)
from .plotting import bar_chart, line_chart
from .protocol import Frame, HoldPressure, TempSetpoint, encode

CONDITION_FLAGS = {"HF": HAPTIC_FEEDBACK, "NF": NO_FEEDBACK}
# Long enough for the slowest passive transient to die out before a
# contact trace starts at its resting temperature.
CONTACT_PREROLL_S = 120.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems instead of exiting itself."""

    def error(self, message: str) -> None:
        raise UsageError(message)


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("true", "yes", "1"):
        return True
    if value in ("false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_app(args) -> AppConfig:
    # populated once in main() so --config is validated on every
    # subcommand, including the ones that consume no values from it
    return args.app


def _fmt(value: Optional[float]) -> str:
    return "none" if value is None else f"{value:.6f}"


def _print_features(features: StepFeatures) -> None:
    print(f"time_to_target_s={_fmt(features.time_to_target)}")
    print(f"avg_heating_rate_c_per_s={_fmt(features.avg_heating_rate)}")
    print(f"peak_heating_rate_c_per_s={_fmt(features.peak_heating_rate)}")
    print(f"cooling_time_to_baseline_s={_fmt(features.cooling_time_to_baseline)}")
    print(f"max_cooling_rate_c_per_s={_fmt(features.max_cooling_rate)}")
    print(f"baseline_temp_c={_fmt(features.baseline_temp)}")


def _features_dict(features: StepFeatures) -> dict:
    return dataclasses.asdict(features)


# -- simulate-thermal ---------------------------------------------------


def _run_closed_loop_trace(
    config: DeviceConfig,
    setpoint_c: float,
    contact: bool,
    heat_s: float,
    cool_s: float,
) -> tuple[list[float], list[float]]:
    """Drive the device over its own wire protocol and return the sensed
    index-finger temperature sampled at the sensing rate."""
    if heat_s <= 0 or cool_s < 0:
        raise InvalidInputError("durations must be positive")
    state = initial_device_state(config)
    inbox: list[bytes] = []
    seq = 0

    def send(payload) -> None:
        nonlocal seq
        inbox.append(
            encode(Frame(seq=seq, timestamp_us=state.time_us, payload=payload))
        )
        seq += 1

    def tick() -> None:
        nonlocal state
        nonlocal inbox
        pending, inbox = inbox, []
        state, _ = device_tick(config, state, pending, config.dt)

    if contact:
        send(HoldPressure(kpa=config.policy.hold_pressure))
        for _ in range(round(CONTACT_PREROLL_S / config.dt)):
            tick()

    t0_tick = state.tick
    times: list[float] = []
    temps: list[float] = []
    send(TempSetpoint(index_c=setpoint_c, thumb_c=setpoint_c))
    heat_ticks = round(heat_s / config.dt)
    cool_ticks = round(cool_s / config.dt)
    for k in range(heat_ticks + cool_ticks):
        if k == heat_ticks:
            send(TempSetpoint(index_c=float("nan"), thumb_c=float("nan")))
        tick()
        sample_tick = state.tick - 1
        if sample_tick % config.sense_divisor == 0:
            times.append((sample_tick - t0_tick) * config.dt)
            temps.append(state.channels[INDEX].sensed_temp_c)
    return times, temps


def _cmd_simulate_thermal(args) -> int:
    app = _load_app(args)
    out = _out_dir(args)
    times, temps = _run_closed_loop_trace(
        app.device, args.setpoint, args.contact, args.duration, args.cool
    )
    trace_path = out / "thermal_trace.csv"
    write_trace_csv(trace_path, times, temps)
    features = extract_features((times, temps), args.setpoint, temps[0])
    _print_features(features)
    if args.format == "json":
        feat_path = out / "thermal_features.json"
        feat_path.write_text(
            json.dumps(_features_dict(features), indent=2) + "\n", encoding="utf-8"
        )
    else:
        feat_path = out / "thermal_features.csv"
        with feat_path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("feature", "value"))
            for key, value in _features_dict(features).items():
                writer.writerow((key, _fmt(value)))
    print(f"wrote {trace_path}")
    print(f"wrote {feat_path}")
    return 0


# -- simulate-force -----------------------------------------------------


def _cmd_simulate_force(args) -> int:
    out = _out_dir(args)
    step = args.pressure_step
    if step <= 0 or args.max_pressure <= 0:
        raise InvalidInputError("pressure grid must be positive")
    pressures = [k * step for k in range(int(args.max_pressure / step) + 1)]
    rows = [
        (p, force_from_pressure(p, c), c)
        for c in DEFAULT_FORCE_MAP.clearance_grid
        for p in pressures
    ]
    if args.format == "json":
        path = out / "force_curves.json"
        payload = [
            {"pressure_kpa": p, "force_n": f, "clearance_mm": c} for p, f, c in rows
        ]
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    else:
        path = out / "force_curves.csv"
        write_force_csv(path, rows)
    top = args.max_pressure
    for c in DEFAULT_FORCE_MAP.clearance_grid:
        print(
            f"clearance {c:g} mm: force at {top:g} kPa = "
            f"{force_from_pressure(top, c):.3f} N"
        )
    ratio = force_from_pressure(top, 2.0) / force_from_pressure(top, 0.0)
    print(f"force ratio 2 mm / 0 mm = {ratio:.4f}")
    print(f"wrote {path}")
    return 0


# -- fitting ------------------------------------------------------------


def _cmd_fit_thermal(args) -> int:
    out = _out_dir(args)
    kwargs = {
        "seed": 0 if args.seed is None else args.seed,
        "max_iter": args.max_iter,
        "restarts": args.restarts,
    }
    if (args.input_unloaded is None) != (args.input_contact is None):
        raise UsageError("--input-unloaded and --input-contact go together")
    if args.input_unloaded is not None:
        unloaded = read_trace_csv(args.input_unloaded)
        contact = read_trace_csv(args.input_contact)
        kwargs["targets_unloaded"] = extract_features(
            unloaded, args.target, unloaded.temps[0]
        )
        kwargs["targets_contact"] = extract_features(
            contact, args.target, contact.temps[0]
        )
    params = fit_thermal_params(**kwargs)
    fields = dataclasses.asdict(params)
    for key, value in fields.items():
        print(f"{key}={value!r}")
    achieved = {}
    for label, is_contact in (("unloaded", False), ("contact", True)):
        trace = simulate_protocol_trace(params, is_contact, target_temp=args.target)
        feats = extract_features(trace, args.target, trace.temps[0])
        achieved[label] = _features_dict(feats)
    path = out / "thermal_fit.json"
    path.write_text(
        json.dumps({"params": fields, "achieved": achieved}, indent=2) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {path}")
    return 0


def _cmd_fit_force(args) -> int:
    out = _out_dir(args)
    rows = read_force_csv(args.input)
    fmap = fit_force_map(rows)
    anchors = {}
    for c, slope in zip(fmap.clearance_grid, fmap.slope_per_clearance):
        force = force_from_pressure(50.0, c, fmap)
        anchors[f"{c:g}"] = force
        print(f"clearance {c:g} mm: slope {slope:.6f} N/kPa, "
              f"force at 50 kPa = {force:.3f} N")
    path = out / "force_fit.json"
    path.write_text(
        json.dumps(
            {
                "clearance_grid": list(fmap.clearance_grid),
                "slope_per_clearance": list(fmap.slope_per_clearance),
                "preload_force": fmap.preload_force,
                "force_at_50_kpa": anchors,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    print(f"wrote {path}")
    return 0


# -- serve --------------------------------------------------------------


def _cmd_serve(args) -> int:
    app = _load_app(args)
    if args.clock is not None:
        parse_clock(args.clock)
        app = dataclasses.replace(
            app, service=dataclasses.replace(app.service, clock=args.clock)
        )
    try:
        asyncio.run(run_service(app, attach_scene=args.scene))
    except KeyboardInterrupt:
        print("stopped")
    return 0


# -- experiments --------------------------------------------------------


def _write_records_json(path: Path, records) -> None:
    rows = [dataclasses.asdict(r) for r in records]
    path.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")


def _cmd_experiment_thermal(args) -> int:
    app = _load_app(args)
    out = _out_dir(args)
    plan = plan_thermal(args.seed)
    records = run_thermal_session(plan, SubjectModel(), config=app.device)
    stem = f"thermal_trials_seed{args.seed}"
    if args.format == "json":
        records_path = out / f"{stem}.json"
        _write_records_json(records_path, records)
    else:
        records_path = out / f"{stem}.csv"
        write_thermal_csv(records_path, records)
    summary = thermal_summary(plan, records)
    summary_path = out / f"thermal_summary_seed{args.seed}.json"
    write_json_summary(summary_path, summary)
    for label in summary["labels"]:
        acc = summary["per_class_accuracy"][label]
        print(f"accuracy[{label}]={_fmt(acc)}")
    print(f"overall_accuracy={_fmt(summary['overall_accuracy'])}")
    print(f"mean_response_time_s={_fmt(summary['mean_response_time_s'])}")
    print(f"wrote {records_path}")
    print(f"wrote {summary_path}")
    return 0


def _cmd_experiment_manip(args) -> int:
    app = _load_app(args)
    out = _out_dir(args)
    condition = CONDITION_FLAGS[args.condition]
    plan = plan_manip(args.seed, condition)
    records = run_manip_session(plan, config=app.device, coupling=app.coupling)
    metrics = manip_metrics(records)
    stem = f"manip_trials_seed{args.seed}_{args.condition}"
    if args.format == "json":
        records_path = out / f"{stem}.json"
        _write_records_json(records_path, records)
    else:
        records_path = out / f"{stem}.csv"
        write_manip_csv(records_path, records)
    summary = manip_summary(plan, records)
    summary_path = out / f"manip_summary_seed{args.seed}_{args.condition}.json"
    write_json_summary(summary_path, summary)
    print(f"trials={metrics.trials}")
    print(f"successes={metrics.successes}")
    print(f"success_rate={_fmt(metrics.success_rate)}")
    print(f"avg_time_to_success_s={_fmt(metrics.avg_time_to_success_s)}")
    print(f"avg_indentation_mm={_fmt(metrics.avg_indentation_mm)}")
    print(f"wrote {records_path}")
    print(f"wrote {summary_path}")
    return 0


# -- plot ---------------------------------------------------------------


def _read_header(path: Path) -> str:
    with path.open("r", encoding="utf-8", newline="") as fh:
        return fh.readline().strip()


def _plot_one(path: Path, out: Path) -> Path:
    header = _read_header(path)
    stem = path.stem
    if header == ",".join(TRACE_HEADER):
        trace = read_trace_csv(path)
        svg = line_chart(
            [("fabric", list(zip(trace.times, trace.temps)))],
            title=stem,
            x_label="time (s)",
            y_label="temperature (°C)",
        )
    elif header == ",".join(FORCE_HEADER):
        rows = read_force_csv(path)
        by_clearance: dict[float, list[tuple[float, float]]] = {}
        for pressure, force, clearance in rows:
            by_clearance.setdefault(clearance, []).append((pressure, force))
        series = [
            (f"{c:g} mm", sorted(points))
            for c, points in sorted(by_clearance.items())
        ]
        svg = line_chart(
            series, title=stem, x_label="pressure (kPa)", y_label="force (N)"
        )
    elif header == ",".join(THERMAL_CSV_COLUMNS):
        with path.open("r", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        labels, values = [], []
        for stimulus in dict.fromkeys(r["stimulus"] for r in rows):
            group = [r for r in rows if r["stimulus"] == stimulus]
            correct = sum(1 for r in group if r["response"] == r["stimulus"])
            labels.append(stimulus)
            values.append(correct / len(group))
        svg = bar_chart(labels, values, title=stem, y_label="accuracy")
    elif header == ",".join(MANIP_CSV_COLUMNS):
        with path.open("r", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        labels = [r["trial"] for r in rows]
        values = [float(r["mean_indentation_mm"]) for r in rows]
        svg = bar_chart(
            labels, values, title=stem, y_label="mean indentation (mm)"
        )
    else:
        raise InvalidInputError(f"{path}: unrecognized CSV header {header!r}")
    out_path = out / f"{stem}.svg"
    out_path.write_text(svg, encoding="utf-8")
    return out_path


def _cmd_plot(args) -> int:
    out = _out_dir(args)
    for name in args.inputs:
        path = Path(name)
        if not path.is_file():
            raise InvalidInputError(f"{path}: no such file")
        print(f"wrote {_plot_one(path, out)}")
    return 0


# -- wiring -------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="thermohaptic", description=__doc__)
    shared = _Parser(add_help=False)
    shared.add_argument("--config", default=None, help="key=value config file")
    shared.add_argument("--seed", type=int, default=None, help="RNG seed")
    shared.add_argument("--out-dir", default=".", help="artifact directory")
    shared.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="record format"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "simulate-thermal", parents=[shared],
        help="closed-loop temperature step over the device stack",
    )
    p.add_argument("--setpoint", type=float, default=40.0, help="target degC")
    p.add_argument(
        "--contact", type=_parse_bool, default=True, metavar="BOOL",
        help="press the pad against skin first (true|false)",
    )
    p.add_argument("--duration", type=float, default=40.0, help="heating hold s")
    p.add_argument("--cool", type=float, default=160.0, help="heater-off tail s")
    p.set_defaults(handler=_cmd_simulate_thermal)

    p = sub.add_parser(
        "simulate-force", parents=[shared],
        help="pressure sweep through the clearance force map",
    )
    p.add_argument("--max-pressure", type=float, default=50.0, help="kPa")
    p.add_argument("--pressure-step", type=float, default=1.0, help="kPa")
    p.set_defaults(handler=_cmd_simulate_force)

    p = sub.add_parser(
        "fit-thermal", parents=[shared],
        help="identify plant parameters from step-response features",
    )
    p.add_argument("--input-unloaded", default=None, help="trace CSV")
    p.add_argument("--input-contact", default=None, help="trace CSV")
    p.add_argument("--target", type=float, default=40.0, help="step target degC")
    p.add_argument("--max-iter", type=int, default=3000)
    p.add_argument("--restarts", type=int, default=4)
    p.set_defaults(handler=_cmd_fit_thermal)

    p = sub.add_parser(
        "fit-force", parents=[shared],
        help="identify per-clearance force slopes from measurements",
    )
    p.add_argument("--input", required=True, help="measurement CSV")
    p.set_defaults(handler=_cmd_fit_force)

    p = sub.add_parser(
        "serve", parents=[shared],
        help="run the device emulator service (UDP + JSON gateway)",
    )
    p.add_argument(
        "--scene", type=_parse_bool, default=True, metavar="BOOL",
        help="attach the pick-and-place scene (true|false)",
    )
    p.add_argument(
        "--clock", default=None, help="realtime, stepped, or accel:<factor>"
    )
    p.set_defaults(handler=_cmd_serve)

    p = sub.add_parser(
        "experiment-thermal", parents=[shared],
        help="run one seeded stimulus-identification session",
    )
    p.set_defaults(handler=_cmd_experiment_thermal)

    p = sub.add_parser(
        "experiment-manip", parents=[shared],
        help="run one seeded pick-and-place session",
    )
    p.add_argument(
        "--condition", choices=sorted(CONDITION_FLAGS), default="HF",
        help="HF = haptic feedback, NF = none",
    )
    p.set_defaults(handler=_cmd_experiment_manip)

    p = sub.add_parser(
        "plot", parents=[shared],
        help="render CSV artifacts to SVG (kind detected from header)",
    )
    p.add_argument("inputs", nargs="+", help="CSV files")
    p.set_defaults(handler=_cmd_plot)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command in ("experiment-thermal", "experiment-manip"):
            if args.seed is None:
                raise UsageError(f"{args.command} requires --seed")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        args.app = load_config(args.config)
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
