"""Experiment runner: scenario files, presets, sweeps, CSV output.

Scenario files are INI-style text (configparser) with the sections
[time], [radio], [run], [gains] and one [station.<id>] per station.
All CSV output uses one fixed schema so downstream plotting never has
to branch on the experiment.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import replace

from . import core, engine, metrics, oracle, policies, presets
from .mobility import MobilitySpec

CSV_HEADER = (
    "run_id,seed,station_id,policy,throughput_bps,p_i_mean,threshold_mean,"
    "p_e_hat,sum_log,jfi,windowed_sum_log_mean,ci_halfwidth"
)

#: default short-term fairness window, mini slots
DEFAULT_WINDOW = 10_000


class ScenarioFileError(ValueError):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "-inf" if x < 0 else "inf"
        return f"{x:.10g}"
    return str(x)


def parse_scenario(path: str):
    """Parse and validate a scenario file; returns (config, replications)."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ScenarioFileError(f"cannot read scenario file {path!r}")
    try:
        tau = cp.getfloat("time", "tau_s", fallback=1.0)
        hot = cp.getfloat("time", "hold_over_tau",
                          fallback=core.DEFAULT_HOLD_OVER_TAU)
        tb = core.TimeBase(tau=tau, hold=tau * hot)

        bandwidth = cp.getfloat("radio", "bandwidth_hz",
                                fallback=core.DEFAULT_BANDWIDTH)
        rates = ()
        if cp.get("radio", "rates_mbps", fallback=""):
            rates = tuple(
                float(v) * 1e6
                for v in cp.get("radio", "rates_mbps").split(",")
            )
        mean_error = cp.getfloat("radio", "estimation_mean_error", fallback=0.0)
        channel = core.ChannelSpec(
            fading=cp.get("radio", "fading", fallback="iid"),
            doppler=cp.getfloat("radio", "doppler_per_slot",
                                fallback=2.0 * math.pi / 100.0),
            rate_map=cp.get("radio", "rate_map", fallback="shannon"),
            rates=rates,
            estimation="linear" if mean_error > 0 else "perfect",
            mean_error=mean_error,
        )

        stations = []
        for section in cp.sections():
            if not section.startswith("station."):
                continue
            sid = int(section.split(".", 1)[1])
            radio = _parse_radio(cp, section)
            traffic = _parse_traffic(cp.get(section, "traffic",
                                            fallback="saturated"))
            pol = core.PolicySpec(cp.get(section, "policy", fallback="ados"))
            stations.append(core.StationSpec(sid, radio, traffic, pol))
        stations.sort(key=lambda s: s.id)

        gains = "derive"
        scale = cp.getfloat("gains", "scale", fallback=1.0)
        if cp.has_section("gains"):
            gains = core.derive_controller_gains(
                tb,
                alpha_p=cp.getfloat("gains", "alpha_p",
                                    fallback=core.DEFAULT_ALPHA),
                g_p=cp.getfloat("gains", "g_p", fallback=core.DEFAULT_G),
                alpha_r=cp.getfloat("gains", "alpha_r",
                                    fallback=core.DEFAULT_ALPHA),
                g_r=cp.getfloat("gains", "g_r", fallback=core.DEFAULT_G),
            )

        cfg = core.ScenarioConfig(
            stations=tuple(stations),
            time_base=tb,
            bandwidth=bandwidth,
            channel=channel,
            horizon=cp.getint("run", "horizon_slots", fallback=1_000_000),
            warmup=cp.getint("run", "warmup_slots", fallback=100_000),
            seed=cp.getint("run", "seed", fallback=1),
            gains=gains,
            gain_scale=scale,
            sampling=cp.getint("run", "sample_every", fallback=1000),
        )
        reps = cp.getint("run", "replications", fallback=1)
    except (configparser.Error, ValueError) as exc:
        raise ScenarioFileError(f"{path}: {exc}") from exc
    return core.validate_scenario(cfg), reps


def _parse_radio(cp, section) -> core.Radio:
    if cp.get(section, "mobility", fallback=""):
        kind = cp.get(section, "mobility")
        mob = MobilitySpec(
            kind=kind,
            start=_pair(cp.get(section, "start", fallback="0,0")),
            target=_pair(cp.get(section, "target", fallback="0,0")),
            duration=cp.getint(section, "duration_slots", fallback=1),
            area_side=cp.getfloat(section, "area_side", fallback=1.0),
            speed=cp.getfloat(section, "speed", fallback=0.0),
            pause=cp.getint(section, "pause_slots", fallback=0),
            receiver=_pair(cp.get(section, "receiver", fallback="0.5,0.5")),
            reference_snr=cp.getfloat(section, "reference_snr", fallback=1.0),
            reference_position=_pair(cp.get(section, "reference_position",
                                            fallback="0,0")),
        )
        return core.Radio(mobility=mob)
    step = None
    if cp.get(section, "step", fallback=""):
        slot, rho2 = cp.get(section, "step").split(",")
        step = (int(slot), float(rho2))
    return core.Radio(rho=cp.getfloat(section, "rho", fallback=1.0), step=step)


def _pair(text):
    a, b = text.split(",")
    return (float(a), float(b))


def _parse_traffic(text: str) -> core.Traffic:
    text = text.strip()
    if text == "saturated":
        return core.Traffic()
    if text.startswith("rate_bps="):
        return core.Traffic("rate", rate_bps=float(text.split("=", 1)[1]))
    if text.startswith("fraction="):
        return core.Traffic("fraction", fraction=float(text.split("=", 1)[1]))
    raise ScenarioFileError(f"unknown traffic spec {text!r}")


def _windowed_mean(run) -> float:
    window = DEFAULT_WINDOW
    if window % run.config.sampling != 0:
        window = run.config.sampling * 10
    try:
        return metrics.windowed_sum_log(run, window).mean_sum_log
    except ValueError:
        return math.nan


def run_jobs(jobs, replications: int) -> list:
    """Execute each job over its replications; return CSV data rows."""
    rows = []
    for job in jobs:
        runs = []
        for k in range(replications):
            cfg = replace(job.config, seed=job.config.seed + k,
                          validated=False)
            runs.append(engine.simulate_run(core.validate_scenario(cfg)))
        per_station = []
        for k, run in enumerate(runs):
            rep = metrics.fairness_report(run)
            wm = _windowed_mean(run)
            for j, sid in enumerate(run.station_ids):
                rows.append([
                    f"{job.label}-r{k}", run.config.seed, sid,
                    run.policy_names[j], rep.per_station[j],
                    run.p_i_mean[j], run.threshold_mean[j], run.p_e_hat,
                    rep.sum_log, rep.jfi, wm, None,
                ])
            per_station.append(rep.per_station)
        n = len(runs[0].station_ids)
        for j in range(n):
            agg = metrics.aggregate([ps[j] for ps in per_station])
            rows.append([
                f"{job.label}-agg", job.config.seed,
                runs[0].station_ids[j], runs[0].policy_names[j], agg.mean,
                metrics.aggregate([r.p_i_mean[j] for r in runs]).mean,
                metrics.aggregate([r.threshold_mean[j] for r in runs]).mean,
                metrics.aggregate([r.p_e_hat for r in runs]).mean,
                metrics.aggregate(
                    [metrics.fairness_report(r).sum_log for r in runs]).mean,
                metrics.aggregate(
                    [metrics.fairness_report(r).jfi for r in runs]).mean,
                metrics.aggregate([_windowed_mean(r) for r in runs]).mean,
                agg.ci_halfwidth if len(runs) > 1 else None,
            ])
    return rows


def rows_to_csv(rows) -> str:
    out = [CSV_HEADER]
    for row in rows:
        out.append(",".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def trace_csv(run) -> str:
    out = ["slot,station_id,p_i,threshold"]
    for k in range(run.trace_slots.size):
        for j, sid in enumerate(run.station_ids):
            out.append(
                f"{run.trace_slots[k]},{sid},"
                f"{_fmt(float(run.trace_p[k, j]))},"
                f"{_fmt(float(run.trace_threshold[k, j]))}"
            )
    return "\n".join(out) + "\n"


def oracle_report(cfg: core.ScenarioConfig) -> str:
    """Human-readable analytic summary for a validated scenario."""
    tb = cfg.time_base
    dists = [
        policies.rate_distribution(policies.initial_rho(s), cfg.bandwidth,
                                   cfg.channel)
        for s in cfg.stations
    ]
    static = oracle.solve_static_optimal(dists, tb.tau, tb.hold)
    g = cfg.gains
    lines = ["# analytic operating point"]
    for i, s in enumerate(cfg.stations):
        lines.append(
            f"station {s.id}: p*={static.p[i]:.6g} "
            f"threshold*={static.thresholds[i]:.6g} bits/s "
            f"predicted_r={static.predicted_rates[i]:.6g} bits/s"
        )
    lines.append(f"sum_log={static.sum_log:.6g}")
    lines.append("# derived controller gains")
    lines.append(f"k_p={g.k_p:.6g} (stability bound {g.k_p_stability:.6g}, "
                 f"noise bound {g.k_p_noise:.6g})")
    lines.append(f"k_r={g.k_r:.6g} (stability bound {g.k_r_stability:.6g}, "
                 f"noise bound {g.k_r_noise:.6g})")
    lines.append(f"alpha_p={g.alpha_p:g} g_p={g.g_p:g} "
                 f"alpha_r={g.alpha_r:g} g_r={g.g_r:g}")
    return "\n".join(lines) + "\n"


SWEEP_AXES = ("n_stations", "delta_rho", "speed", "mean_error",
              "load_fraction")


def apply_sweep(cfg: core.ScenarioConfig, axis: str, value: float):
    """One sweep point: transform the base scenario along the axis."""
    if axis == "n_stations":
        n = int(value)
        stations = list(cfg.stations)
        template = stations[-1]
        while len(stations) < n:
            sid = max(s.id for s in stations) + 1
            stations.append(replace(template, id=sid))
        stations = stations[:n]
        return replace(cfg, stations=tuple(stations), validated=False)
    if axis == "delta_rho":
        n = len(cfg.stations)
        rhos = presets._grouped_rho(n, float(value))
        stations = tuple(
            replace(s, radio=replace(s.radio, rho=rhos[i]))
            for i, s in enumerate(cfg.stations)
        )
        return replace(cfg, stations=stations, validated=False)
    if axis == "speed":
        stations = tuple(
            replace(s, radio=replace(
                s.radio,
                mobility=replace(s.radio.mobility, speed=float(value))))
            if s.radio.mobility is not None else s
            for s in cfg.stations
        )
        return replace(cfg, stations=stations, validated=False)
    if axis == "mean_error":
        ch = replace(cfg.channel,
                     estimation="linear" if value > 0 else "perfect",
                     mean_error=float(value))
        return replace(cfg, channel=ch, validated=False)
    if axis == "load_fraction":
        stations = tuple(
            replace(s, traffic=replace(s.traffic, fraction=float(value)))
            if s.traffic.kind == "fraction" else s
            for s in cfg.stations
        )
        return replace(cfg, stations=stations, validated=False)
    raise ScenarioFileError(f"unknown sweep axis {axis!r}")


def _write(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dosnet-sim",
        description="Slotted-contention opportunistic-scheduling simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("file")
    p_run.add_argument("--out")

    p_pre = sub.add_parser("preset", help="run a named experiment preset")
    p_pre.add_argument("name")
    p_pre.add_argument("--out", help="output directory (default stdout)")
    p_pre.add_argument("--seed", type=int, default=1)
    p_pre.add_argument("--horizon", type=int)
    p_pre.add_argument("--replications", type=int, default=3)

    p_or = sub.add_parser("oracle", help="print the analytic operating point")
    p_or.add_argument("file")

    p_sw = sub.add_parser("sweep", help="sweep one axis of a scenario")
    p_sw.add_argument("file")
    p_sw.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sw.add_argument("--values", required=True,
                      help="comma-separated axis values")
    p_sw.add_argument("--out")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg, reps = parse_scenario(args.file)
            rows = run_jobs([presets.Job("run", cfg)], reps)
            _write(rows_to_csv(rows), args.out)
        elif args.command == "preset":
            jobs = presets.build_preset(args.name, seed=args.seed,
                                        horizon=args.horizon)
            rows = run_jobs(jobs, args.replications)
            text = rows_to_csv(rows)
            if args.out:
                import os

                os.makedirs(args.out, exist_ok=True)
                _write(text, os.path.join(args.out, f"{args.name}.csv"))
                for job in jobs:
                    if job.trace:
                        run = engine.simulate_run(job.config)
                        _write(trace_csv(run),
                               os.path.join(args.out,
                                            f"{args.name}-{job.label}.csv"))
            else:
                _write(text, None)
        elif args.command == "oracle":
            cfg, _ = parse_scenario(args.file)
            _write(oracle_report(cfg), None)
        elif args.command == "sweep":
            cfg, reps = parse_scenario(args.file)
            jobs = []
            for v in args.values.split(","):
                point = core.validate_scenario(
                    apply_sweep(cfg, args.axis, float(v)))
                jobs.append(presets.Job(f"{args.axis}={v}", point))
            rows = run_jobs(jobs, reps)
            _write(rows_to_csv(rows), args.out)
    except (ScenarioFileError, core.ScenarioError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failure contract
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
