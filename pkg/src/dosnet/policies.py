"""Resolution of policy names into concrete engine parameters.

Each station's policy becomes a small record of flags and numbers the
event loop consumes directly: whether it probes before transmitting,
whether the access probability and the threshold are adaptive, and the
fixed values otherwise. All population-level computations (optimal
static point, common team threshold, best fixed p for the never-skip
baselines) happen here, once, at scenario start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import core, oracle

E = math.e

# threshold modes
THR_FIXED = 0  # precomputed constant
THR_CONTROLLER = 1  # adaptive proportional loop
THR_WINDOW = 2  # re-solved from the last completed SNR window
THR_LOOKUP = 3  # re-solved from the true current mean SNR (benchmark)

#: default common access probability c/N for the team/non-cooperative
#: baselines; below 1/N so that opportunistic skipping has room to pay off
BASELINE_P_FACTOR = 0.6

#: default SNR-averaging window (mini slots) for the windowed-threshold
#: policy; desk-scale stand-in for very long measurement periods
DEFAULT_SNR_WINDOW = 1_000_000


@dataclass(frozen=True)
class ResolvedPolicy:
    """Numeric policy record for one station, consumed by the event loop."""

    name: str
    probes: bool
    adaptive_p: bool
    thr_mode: int
    p: float  # initial/fixed access probability
    threshold: float  # initial/fixed rate threshold, bits/s
    snr_window: int = 0  # THR_WINDOW only, mini slots
    active_from: int = 0  # slot at which the station joins


def rate_distribution(rho: float, bandwidth: float, channel: core.ChannelSpec):
    """Achievable-rate distribution of a station at mean SNR rho."""
    if channel.rate_map == "discrete":
        return oracle.DiscreteRates(rho, tuple(channel.rates), bandwidth)
    return oracle.ShannonExponential(rho, bandwidth)


def initial_rho(station: core.StationSpec) -> float:
    from . import mobility as mob

    if station.radio.mobility is not None:
        spec = station.radio.mobility
        return mob.snr_from_position(spec, position_at_start(spec))
    return station.radio.rho


def position_at_start(spec):
    return spec.start


def resolve_policies(cfg: core.ScenarioConfig) -> list:
    """Turn every station's PolicySpec into a ResolvedPolicy.

    Raises ScenarioError indirectly through oracle errors only for
    degenerate rate distributions.
    """
    tb = cfg.time_base
    stations = cfg.stations
    n = len(stations)
    dists = [
        rate_distribution(initial_rho(s), cfg.bandwidth, cfg.channel)
        for s in stations
    ]
    names = [s.policy.name for s in stations]

    static_cfg = None
    if "static_optimal" in names:
        static_cfg = oracle.solve_static_optimal(dists, tb.tau, tb.hold)

    tdos_p = None
    tdos_thr = None
    if "tdos" in names:
        tdos_p = [
            s.policy.params.get("p", BASELINE_P_FACTOR / n) for s in stations
        ]
        tdos_thr = oracle.tdos_threshold(dists, tdos_p, tb.tau, tb.hold)

    non_opp_p = None
    if "non_opportunistic" in names:
        non_opp_p = oracle.optimize_uniform_p(dists, tb.tau, tb.hold, 1.0)
    csma_p = None
    if "csma_ca" in names:
        csma_p = oracle.optimize_uniform_p(
            dists, tb.tau, tb.hold, 1.0 + tb.hold / tb.tau
        )

    out = []
    for i, s in enumerate(stations):
        name = s.policy.name
        prm = s.policy.params
        active_from = int(prm.get("active_from", 0))
        if name == "ados":
            p0 = prm.get("p0", min(0.5, 1.0 / n))
            out.append(ResolvedPolicy(name, True, True, THR_CONTROLLER,
                                      p0, 0.0, active_from=active_from))
        elif name == "static_optimal":
            p = prm.get("p", static_cfg.p[i])
            thr = prm.get("threshold", static_cfg.thresholds[i])
            out.append(ResolvedPolicy(name, True, False, THR_FIXED, p, thr,
                                      active_from=active_from))
        elif name == "non_opportunistic":
            p = prm.get("p", non_opp_p)
            out.append(ResolvedPolicy(name, True, False, THR_FIXED, p, 0.0,
                                      active_from=active_from))
        elif name == "csma_ca":
            p = prm.get("p", csma_p)
            out.append(ResolvedPolicy(name, False, False, THR_FIXED, p, 0.0,
                                      active_from=active_from))
        elif name == "tdos":
            out.append(ResolvedPolicy(name, True, False, THR_FIXED,
                                      tdos_p[i], tdos_thr,
                                      active_from=active_from))
        elif name == "ndos":
            p = prm.get("p", BASELINE_P_FACTOR / n)
            others = [
                st.policy.params.get("p", BASELINE_P_FACTOR / n)
                for st in stations
            ]
            own_ps = p
            for j, pj in enumerate(others):
                if j != i:
                    own_ps *= 1.0 - pj
            thr = oracle.ndos_threshold(dists[i], own_ps, tb.tau, tb.hold)
            out.append(ResolvedPolicy(name, True, False, THR_FIXED, p, thr,
                                      active_from=active_from))
        elif name == "static_ados":
            p0 = prm.get("p0", min(0.5, 1.0 / n))
            win = int(prm.get("snr_window", DEFAULT_SNR_WINDOW))
            thr0 = oracle.solve_threshold(dists[i], tb.tau, tb.hold)
            out.append(ResolvedPolicy(name, True, True, THR_WINDOW, p0, thr0,
                                      snr_window=win, active_from=active_from))
        elif name == "oracle_tracking":
            p0 = prm.get("p0", min(0.5, 1.0 / n))
            thr0 = oracle.solve_threshold(dists[i], tb.tau, tb.hold)
            out.append(ResolvedPolicy(name, True, True, THR_LOOKUP, p0, thr0,
                                      active_from=active_from))
        else:
            raise core.ScenarioError([f"station {s.id}: unknown policy {name!r}"])
    return out


def on_probe_transmits(measured_rate: float, threshold: float) -> bool:
    """The transmit/skip rule every probing policy shares."""
    return measured_rate >= threshold
