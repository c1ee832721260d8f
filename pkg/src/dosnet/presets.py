"""Desk-scale experiment presets.

Each preset expands into a list of labelled scenario jobs; the runner
executes every job over the configured replications and writes one CSV.
Horizons are 10^5-10^7 mini slots so a full preset stays within minutes
on commodity hardware while preserving each experiment's phenomenon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import core
from .mobility import MobilitySpec

PRESET_NAMES = (
    "fig5_homogeneous",
    "fig6a_halfload",
    "fig6b_tenthload",
    "fig7_heterogeneous",
    "fig_jakes",
    "fig_discrete",
    "fig_imperfect",
    "fig8_stability",
    "fig9a_join",
    "fig9b_snrstep",
    "fig9c_moving",
    "fig10_mobility",
)

COMPARED_POLICIES = (
    "ados", "static_optimal", "tdos", "ndos", "non_opportunistic", "csma_ca",
)

#: 802.11a-like payload rates, bits/s
DISCRETE_RATES = tuple(r * 1e6 for r in (6, 9, 12, 18, 24, 36, 48, 54))


@dataclass(frozen=True)
class Job:
    label: str  # stable identifier, used in run_id and file names
    config: core.ScenarioConfig
    trace: bool = False  # emit the sampled trace CSV as well


def _homogeneous(n, policy, rho=1.0, horizon=2_000_000, warmup=500_000,
                 seed=1, **cfg_kw):
    stations = tuple(
        core.StationSpec(i, radio=core.Radio(rho=rho),
                         policy=core.PolicySpec(policy))
        for i in range(n)
    )
    return core.ScenarioConfig(stations=stations, horizon=horizon,
                               warmup=warmup, seed=seed, **cfg_kw)


def _grouped_rho(n, delta_rho, groups=4):
    """rho_i = 1 + (g-1)*delta_rho with stations split into equal groups."""
    per = n // groups
    return [1.0 + (i // per) * delta_rho for i in range(n)]


def _heterogeneous(n, delta_rho, policy, horizon=2_000_000, warmup=500_000,
                   seed=1, **cfg_kw):
    rhos = _grouped_rho(n, delta_rho)
    stations = tuple(
        core.StationSpec(i, radio=core.Radio(rho=rhos[i]),
                         policy=core.PolicySpec(policy))
        for i in range(n)
    )
    return core.ScenarioConfig(stations=stations, horizon=horizon,
                               warmup=warmup, seed=seed, **cfg_kw)


def build_preset(name: str, seed: int = 1, horizon: int | None = None) -> list:
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown preset {name!r}")
    jobs = []

    def H(default):
        return horizon if horizon is not None else default

    if name == "fig5_homogeneous":
        for n in (2, 5, 10, 20):
            for pol in COMPARED_POLICIES:
                cfg = _homogeneous(n, pol, horizon=H(2_000_000), seed=seed)
                jobs.append(Job(f"n{n}-{pol}", cfg))

    elif name in ("fig6a_halfload", "fig6b_tenthload"):
        frac = 0.5 if name == "fig6a_halfload" else 0.1
        for n in (5, 10, 20):
            for pol in ("ados", "tdos"):
                stations = [
                    core.StationSpec(0, radio=core.Radio(rho=1.0),
                                     policy=core.PolicySpec(pol))
                ]
                for i in range(1, n):
                    stations.append(core.StationSpec(
                        i, radio=core.Radio(rho=1.0),
                        traffic=core.Traffic("fraction", fraction=frac),
                        policy=core.PolicySpec(pol)))
                cfg = core.ScenarioConfig(stations=tuple(stations),
                                          horizon=H(2_000_000),
                                          warmup=500_000, seed=seed)
                jobs.append(Job(f"n{n}-{pol}", cfg))

    elif name == "fig7_heterogeneous":
        for dr in (0.0, 1.0, 2.0, 3.0):
            for pol in ("ados", "tdos", "static_optimal"):
                cfg = _heterogeneous(20, dr, pol, horizon=H(2_000_000),
                                     seed=seed)
                jobs.append(Job(f"dr{dr:g}-{pol}", cfg))

    elif name == "fig_jakes":
        for fading in ("iid", "jakes"):
            ch = core.ChannelSpec(fading=fading)
            for pol in COMPARED_POLICIES:
                cfg = _heterogeneous(20, 2.0, pol, horizon=H(2_000_000),
                                     seed=seed, channel=ch)
                jobs.append(Job(f"{fading}-{pol}", cfg))

    elif name == "fig_discrete":
        ch = core.ChannelSpec(rate_map="discrete", rates=DISCRETE_RATES)
        for pol in COMPARED_POLICIES:
            cfg = _heterogeneous(20, 2.0, pol, horizon=H(2_000_000),
                                 seed=seed, channel=ch)
            jobs.append(Job(f"discrete-{pol}", cfg))

    elif name == "fig_imperfect":
        for err in (0.0, 0.1, 0.2, 0.3):
            ch = core.ChannelSpec(estimation="linear", mean_error=err)
            for pol in COMPARED_POLICIES:
                cfg = _heterogeneous(20, 2.0, pol, horizon=H(2_000_000),
                                     seed=seed, channel=ch)
                jobs.append(Job(f"err{err:g}-{pol}", cfg))

    elif name == "fig8_stability":
        for scale, tag in ((1.0, "proposed"), (10.0, "x10")):
            cfg = _homogeneous(5, "ados", horizon=H(1_000_000),
                               warmup=200_000, seed=seed, gain_scale=scale,
                               sampling=100)
            jobs.append(Job(f"gains-{tag}", cfg, trace=True))

    elif name == "fig9a_join":
        for scale, tag in ((1.0, "proposed"), (0.1, "div10")):
            stations = tuple(
                core.StationSpec(
                    i, radio=core.Radio(rho=1.0),
                    policy=core.PolicySpec(
                        "ados",
                        {"active_from": 0 if i < 5 else 1_000_000}))
                for i in range(10)
            )
            cfg = core.ScenarioConfig(stations=stations,
                                      horizon=H(2_000_000), warmup=100_000,
                                      seed=seed, gain_scale=scale,
                                      sampling=1000)
            jobs.append(Job(f"join-{tag}", cfg, trace=True))

    elif name == "fig9b_snrstep":
        for scale, tag in ((1.0, "proposed"), (0.1, "div10")):
            stations = tuple(
                core.StationSpec(i,
                                 radio=core.Radio(rho=1.0, step=(300_000, 4.0)),
                                 policy=core.PolicySpec("ados"))
                for i in range(2)
            )
            cfg = core.ScenarioConfig(stations=stations, horizon=H(400_000),
                                      warmup=0, seed=seed, gain_scale=scale,
                                      sampling=500)
            jobs.append(Job(f"step-{tag}", cfg, trace=True))

    elif name == "fig9c_moving":
        area = 1.0
        mob = MobilitySpec(kind="linear", start=(0.0, 0.0),
                           target=(0.45, 0.45), duration=1_000_000,
                           area_side=area, receiver=(0.5, 0.5),
                           reference_snr=1.0, reference_position=(0.0, 0.0))
        stations = (
            core.StationSpec(0, radio=core.Radio(mobility=mob),
                             policy=core.PolicySpec("ados")),
            core.StationSpec(1, radio=core.Radio(rho=1.0),
                             policy=core.PolicySpec("ados")),
        )
        cfg = core.ScenarioConfig(stations=stations, horizon=H(1_000_000),
                                  warmup=0, seed=seed, sampling=1000)
        jobs.append(Job("moving", cfg, trace=True))

    elif name == "fig10_mobility":
        policies_ = ("ados", "static_ados", "tdos", "ndos",
                     "non_opportunistic", "oracle_tracking")
        for speed in (1e-6, 1e-5, 1e-4):
            for pol in policies_:
                stations = []
                for i in range(10):
                    mob = MobilitySpec(kind="waypoint",
                                       start=(0.1 + 0.08 * i, 0.2),
                                       area_side=1.0, speed=speed,
                                       receiver=(0.5, 0.5),
                                       reference_snr=1.0,
                                       reference_position=(0.0, 0.0))
                    params = {"snr_window": 200_000} if pol == "static_ados" else {}
                    stations.append(core.StationSpec(
                        i, radio=core.Radio(mobility=mob),
                        policy=core.PolicySpec(pol, params)))
                cfg = core.ScenarioConfig(stations=tuple(stations),
                                          horizon=H(1_000_000),
                                          warmup=200_000, seed=seed,
                                          sampling=1000)
                jobs.append(Job(f"v{speed:g}-{pol}", cfg))

    return jobs
