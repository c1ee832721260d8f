"""The mini-slot event loop.

A numba kernel executes contention, probing, transmission and the two
control loops slot by slot. A thin Python driver cuts the horizon into
segments at the points where slow, out-of-band state changes: mean-SNR
steps, mobility position updates, and windowed threshold recomputations.
Everything inside a segment is branch-free of Python.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import core, mobility, oracle, policies
from .control import EMPTY_SLOT_TARGET, HOLD_ESTIMATE_BETA
from .core import ScenarioConfig, validate_scenario
from .rng import PURPOSE_INDEX, next_exponential, next_uniform, stream_state

E = math.e

#: slots between mobility position (and tracked-oracle) refreshes
MOBILITY_UPDATE_SLOTS = 1000


@dataclass
class RunResult:
    """Everything one simulation produced, post-warmup unless noted."""

    station_ids: tuple
    policy_names: tuple
    tau: float
    delivered_bits: np.ndarray  # per station, post-warmup
    elapsed_slots: int  # post-warmup mini slots (incl. occupancy)
    contention_slots: int
    empty_slots: int
    collisions: int
    success_skip: int
    success_tx: int
    outages: int
    collision_occupancy: int  # mini slots spent in collisions
    success_occupancy: int  # mini slots spent in successes (incl. skips)
    p_i_mean: np.ndarray
    threshold_mean: np.ndarray
    trace_slots: np.ndarray  # sampled slot indices (whole run)
    trace_p: np.ndarray  # [samples, n]
    trace_threshold: np.ndarray
    trace_bits: np.ndarray  # cumulative delivered bits from slot 0
    config: ScenarioConfig = field(repr=False, default=None)

    @property
    def p_e_hat(self) -> float:
        if self.contention_slots == 0:
            return math.nan
        return self.empty_slots / self.contention_slots

    @property
    def throughput(self) -> np.ndarray:
        """Per-station delivered bits per second, post-warmup."""
        return self.delivered_bits / (self.elapsed_slots * self.tau)

    def check_slot_identity(self) -> bool:
        return (
            self.empty_slots + self.collision_occupancy + self.success_occupancy
            == self.elapsed_slots
        )


@njit(cache=True)
def _jakes_gain(cos_aoa, phases, doppler, t):
    re = 0.0
    im = 0.0
    for k in range(cos_aoa.shape[0]):
        theta = doppler * t * cos_aoa[k] + phases[k]
        re += math.cos(theta)
        im += math.sin(theta)
    inv = 1.0 / cos_aoa.shape[0]
    return (re * re + im * im) * inv


@njit(cache=True)
def _rate_of(snr, bandwidth, rate_mode, rates):
    s = bandwidth * math.log2(1.0 + snr)
    if rate_mode == 0:
        return s
    best = 0.0
    for k in range(rates.shape[0]):
        if rates[k] < s:
            best = rates[k]
        else:
            break
    return best


@njit(cache=True)
def _segment(
    t0, t1, horizon, warmup,
    # per-station state (mutated)
    p, err_p, hold_est, thr, err_r, backlog,
    # per-station constants
    probes, adaptive_p, thr_ctrl, active_from, saturated, arrival, rho,
    # rng states (mutated)
    cont, fade, est,
    # channel
    fading_mode, cos_aoa, phases, doppler, rate_mode, rates, bandwidth,
    mean_error,
    # protocol constants
    tau, hold_slots, hold, k_p, alpha_p, k_r, alpha_r,
    # accumulators (mutated)
    iacc, delivered, delivered_total, psum, thrsum,
    # traces (mutated)
    sample_every, tr_slot, tr_p, tr_thr, tr_bits, tr_idx_io,
    # interval state
    interval_io,
):
    n = p.shape[0]
    t = t0
    empty_since = interval_io[0]
    tr_idx = tr_idx_io[0]
    next_sample = (t // sample_every) * sample_every
    if next_sample < t:
        next_sample += sample_every
    e_target = 1.0 / (E - 1.0)
    while t < t1:
        if tr_idx < tr_slot.shape[0] and t >= next_sample:
            tr_slot[tr_idx] = t
            for i in range(n):
                tr_p[tr_idx, i] = p[i]
                tr_thr[tr_idx, i] = thr[i]
                tr_bits[tr_idx, i] = delivered_total[i]
            tr_idx += 1
            next_sample += sample_every
        for i in range(n):
            if not saturated[i] and arrival[i] > 0.0:
                backlog[i] += arrival[i]
        post = t >= warmup
        n_cont = 0
        winner = -1
        all_probe = True
        for i in range(n):
            if t < active_from[i]:
                continue
            if not saturated[i] and backlog[i] <= 0.0:
                continue
            if next_uniform(cont[i]) < p[i]:
                n_cont += 1
                winner = i
                if not probes[i]:
                    all_probe = False
        if post:
            iacc[0] += 1  # contention slots
            for i in range(n):
                if t >= active_from[i]:
                    psum[i] += p[i]
                    thrsum[i] += thr[i]
            iacc[9] += 1  # slots with stats accumulated
        if n_cont == 0:
            empty_since += 1
            if post:
                iacc[1] += 1  # empty
                iacc[8] += 1  # elapsed
            t += 1
            continue
        duration = 1
        if n_cont >= 2:
            if not all_probe:
                duration = 1 + hold_slots
            if post:
                iacc[2] += 1  # collisions
                iacc[6] += duration  # collision occupancy
        else:
            i = winner
            if fading_mode == 0:
                g = next_exponential(fade[i])
            else:
                g = _jakes_gain(cos_aoa[i], phases[i], doppler, float(t))
            snr = rho[i] * g
            true_rate = _rate_of(snr, bandwidth, rate_mode, rates)
            if mean_error > 0.0:
                eps = 2.0 * mean_error * (2.0 * next_uniform(est[i]) - 1.0)
                s2 = snr * (1.0 - eps)
                if s2 < 0.0:
                    s2 = 0.0
                meas = _rate_of(s2, bandwidth, rate_mode, rates) * (1.0 - mean_error)
            else:
                meas = true_rate
            transmit = True
            if probes[i] and meas < thr[i]:
                transmit = False
            if thr_ctrl[i]:
                excess = meas - thr[i]
                if excess < 0.0:
                    excess = 0.0
                target = thr[i] * tau * E / hold
                err_r[i] += alpha_r * (excess - target - err_r[i])
                nt = k_r * err_r[i]
                thr[i] = nt if nt > 0.0 else 0.0
            if transmit:
                duration = 1 + hold_slots
                bits = meas * hold
                if not saturated[i] and bits > backlog[i]:
                    bits = backlog[i]
                if meas > true_rate:
                    got = 0.0
                    if post:
                        iacc[5] += 1  # outages
                else:
                    got = bits
                if not saturated[i]:
                    backlog[i] -= got
                delivered_total[i] += got
                if post:
                    delivered[i] += got
                    iacc[4] += 1  # success transmit
                    iacc[7] += duration  # success occupancy
                hold_obs = float(1 + hold_slots)
            else:
                if post:
                    iacc[3] += 1  # success skip
                    iacc[7] += duration
                hold_obs = 1.0
            if adaptive_p[i]:
                hold_est[i] += HOLD_ESTIMATE_BETA * (hold_obs - hold_est[i])
        # the non-empty slot closes the contention interval for everyone
        for j in range(n):
            if adaptive_p[j] and t >= active_from[j]:
                err_p[j] += alpha_p * (e_target - empty_since - err_p[j])
                ti = k_p * tau * (hold_est[j] + (E - 1.0)) * err_p[j]
                if ti <= 0.0:
                    p[j] = 1.0
                else:
                    pj = 1.0 / ti
                    if pj < 1e-6:
                        pj = 1e-6
                    elif pj > 1.0:
                        pj = 1.0
                    p[j] = pj
        empty_since = 0
        if post:
            iacc[8] += duration  # elapsed
        if duration > 1:
            for i in range(n):
                if not saturated[i] and arrival[i] > 0.0:
                    backlog[i] += arrival[i] * (duration - 1)
        t += duration
    interval_io[0] = empty_since
    tr_idx_io[0] = tr_idx
    return t


class _SimState:
    """Mutable arrays shared between segments of one run."""

    def __init__(self, cfg: ScenarioConfig):
        cfg = validate_scenario(cfg)
        self.cfg = cfg
        tb = cfg.time_base
        self.resolved = policies.resolve_policies(cfg)
        n = len(cfg.stations)
        self.n = n
        r = self.resolved
        self.p = np.array([rp.p for rp in r])
        self.thr = np.array([rp.threshold for rp in r])
        self.err_r = np.zeros(n)
        self.probes = np.array([rp.probes for rp in r], dtype=np.bool_)
        self.adaptive_p = np.array([rp.adaptive_p for rp in r], dtype=np.bool_)
        self.thr_ctrl = np.array(
            [rp.thr_mode == policies.THR_CONTROLLER for rp in r], dtype=np.bool_
        )
        self.active_from = np.array([rp.active_from for rp in r], dtype=np.int64)
        g = cfg.gains
        self.gains = g
        # seed the smoothed p-loop error so the first output equals p0
        self.hold_est = np.full(n, tb.hold_slots + 1.0)
        k_eff = g.k_p * tb.tau * (self.hold_est + (E - 1.0))
        self.err_p = 1.0 / (k_eff * self.p)
        # traffic
        self.saturated = np.array(
            [s.traffic.kind == core.SATURATED for s in cfg.stations], dtype=np.bool_
        )
        self.arrival = np.zeros(n)
        self.backlog = np.zeros(n)
        frac_idx = [
            i for i, s in enumerate(cfg.stations) if s.traffic.kind == "fraction"
        ]
        sat_rates = None
        if frac_idx:
            dists = [
                policies.rate_distribution(
                    policies.initial_rho(s), cfg.bandwidth, cfg.channel
                )
                for s in cfg.stations
            ]
            sat_rates = oracle.solve_static_optimal(
                dists, tb.tau, tb.hold
            ).predicted_rates
        for i, s in enumerate(cfg.stations):
            if s.traffic.kind == "rate":
                self.arrival[i] = s.traffic.rate_bps * tb.tau
            elif s.traffic.kind == "fraction":
                self.arrival[i] = s.traffic.fraction * sat_rates[i] * tb.tau
        # rng
        self.cont = np.stack(
            [stream_state(cfg.seed, s.id, PURPOSE_INDEX["contention"])
             for s in cfg.stations]
        )
        self.fade = np.stack(
            [stream_state(cfg.seed, s.id, PURPOSE_INDEX["fading"])
             for s in cfg.stations]
        )
        self.est = np.stack(
            [stream_state(cfg.seed, s.id, PURPOSE_INDEX["estimation"])
             for s in cfg.stations]
        )
        # fading
        ch = cfg.channel
        self.fading_mode = 0 if ch.fading == "iid" else 1
        K = ch.oscillators
        self.cos_aoa = np.zeros((n, K))
        self.phases = np.zeros((n, K))
        if self.fading_mode == 1:
            for i, s in enumerate(cfg.stations):
                st = stream_state(cfg.seed, s.id, PURPOSE_INDEX["fading"])
                rot = next_uniform(st)
                ang = 2.0 * np.pi * (np.arange(K) + rot) / K
                self.cos_aoa[i] = np.cos(ang)
                self.phases[i] = np.array(
                    [2.0 * np.pi * next_uniform(st) for _ in range(K)]
                )
        self.rate_mode = 0 if ch.rate_map == "shannon" else 1
        self.rates = np.asarray(ch.rates, dtype=np.float64)
        self.mean_error = ch.mean_error if ch.estimation == "linear" else 0.0
        # slow SNR state
        self.rho = np.array([policies.initial_rho(s) for s in cfg.stations])
        self.walkers = {}
        for i, s in enumerate(cfg.stations):
            if s.radio.mobility is not None and s.radio.mobility.kind == "waypoint":
                from .rng import RngStream

                rng = RngStream(cfg.seed, s.id, "mobility")
                self.walkers[i] = mobility.WaypointWalker(s.radio.mobility, rng)
        # accumulators
        self.iacc = np.zeros(10, dtype=np.int64)
        self.delivered = np.zeros(n)
        self.delivered_total = np.zeros(n)
        self.psum = np.zeros(n)
        self.thrsum = np.zeros(n)
        n_samples = cfg.horizon // cfg.sampling + 2
        self.tr_slot = np.full(n_samples, -1, dtype=np.int64)
        self.tr_p = np.zeros((n_samples, n))
        self.tr_thr = np.zeros((n_samples, n))
        self.tr_bits = np.zeros((n_samples, n))
        self.tr_idx = np.zeros(1, dtype=np.int64)
        self.interval = np.zeros(1, dtype=np.int64)
        # windowed SNR averaging for re-solved thresholds
        self.window_stations = [
            i for i, rp in enumerate(r) if rp.thr_mode == policies.THR_WINDOW
        ]
        self.lookup_stations = [
            i for i, rp in enumerate(r) if rp.thr_mode == policies.THR_LOOKUP
        ]
        self.snr_window = max(
            (r[i].snr_window for i in self.window_stations), default=0
        )
        self.rho_accum = np.zeros(n)
        self.rho_accum_slots = 0
        self.mobile = any(s.radio.mobility is not None for s in cfg.stations)

    def has_mobility(self):
        return self.mobile


def _boundaries(state: _SimState):
    """Sorted slot indices where the driver must intervene."""
    cfg = state.cfg
    marks = {cfg.horizon}
    for s in cfg.stations:
        if s.radio.step is not None:
            marks.add(int(s.radio.step[0]))
    if state.snr_window:
        marks.update(range(state.snr_window, cfg.horizon, state.snr_window))
    if state.has_mobility() or state.lookup_stations:
        marks.update(range(MOBILITY_UPDATE_SLOTS, cfg.horizon, MOBILITY_UPDATE_SLOTS))
    return sorted(m for m in marks if 0 < m <= cfg.horizon)


def _refresh_rho(state: _SimState, t: int):
    for i, s in enumerate(state.cfg.stations):
        if s.radio.mobility is not None:
            pos = mobility.position_at(
                s.radio.mobility, t, walker=state.walkers.get(i)
            )
            state.rho[i] = mobility.snr_from_position(s.radio.mobility, pos)
        elif s.radio.step is not None and t >= s.radio.step[0]:
            state.rho[i] = s.radio.step[1]


def _window_rollover(state: _SimState):
    """Recompute re-solved thresholds from the window-averaged mean SNR."""
    cfg = state.cfg
    tb = cfg.time_base
    if state.rho_accum_slots == 0:
        return
    avg = state.rho_accum / state.rho_accum_slots
    for i in state.window_stations:
        d = policies.rate_distribution(avg[i], cfg.bandwidth, cfg.channel)
        state.thr[i] = oracle.solve_threshold(d, tb.tau, tb.hold)
    if state.has_mobility():
        # team/best-response baselines refresh with the same cadence
        names = [rp.name for rp in state.resolved]
        if "tdos" in names:
            dists = [
                policies.rate_distribution(avg[i], cfg.bandwidth, cfg.channel)
                for i in range(state.n)
            ]
            tp = [state.resolved[i].p for i in range(state.n)]
            thr = oracle.tdos_threshold(dists, tp, tb.tau, tb.hold)
            for i, nm in enumerate(names):
                if nm == "tdos":
                    state.thr[i] = thr
        for i, nm in enumerate(names):
            if nm == "ndos":
                d = policies.rate_distribution(avg[i], cfg.bandwidth, cfg.channel)
                own_ps = state.resolved[i].p
                for j in range(state.n):
                    if j != i:
                        own_ps *= 1.0 - state.resolved[j].p
                state.thr[i] = oracle.ndos_threshold(d, own_ps, tb.tau, tb.hold)
    state.rho_accum[:] = 0.0
    state.rho_accum_slots = 0


def _refresh_lookup(state: _SimState):
    cfg = state.cfg
    tb = cfg.time_base
    for i in state.lookup_stations:
        d = policies.rate_distribution(state.rho[i], cfg.bandwidth, cfg.channel)
        state.thr[i] = oracle.solve_threshold(d, tb.tau, tb.hold)


def simulate_run(cfg: ScenarioConfig) -> RunResult:
    """Execute one full scenario deterministically."""
    state = _SimState(cfg)
    cfg = state.cfg
    tb = cfg.time_base
    g = state.gains
    _refresh_lookup(state)
    t = 0
    for boundary in _boundaries(state):
        if t >= boundary:
            continue
        seg_len = boundary - t
        t_end = _segment(
            t, boundary, cfg.horizon, cfg.warmup,
            state.p, state.err_p, state.hold_est, state.thr, state.err_r,
            state.backlog,
            state.probes, state.adaptive_p, state.thr_ctrl, state.active_from,
            state.saturated, state.arrival, state.rho,
            state.cont, state.fade, state.est,
            state.fading_mode, state.cos_aoa, state.phases,
            cfg.channel.doppler, state.rate_mode, state.rates, cfg.bandwidth,
            state.mean_error,
            tb.tau, tb.hold_slots, tb.hold,
            g.k_p, g.alpha_p, g.k_r, g.alpha_r,
            state.iacc, state.delivered, state.delivered_total,
            state.psum, state.thrsum,
            cfg.sampling, state.tr_slot, state.tr_p, state.tr_thr,
            state.tr_bits, state.tr_idx,
            state.interval,
        )
        state.rho_accum += state.rho * seg_len
        state.rho_accum_slots += seg_len
        t = t_end
        if t >= cfg.horizon:
            break
        _refresh_rho(state, t)
        if state.snr_window and boundary % state.snr_window == 0:
            _window_rollover(state)
        if state.lookup_stations:
            _refresh_lookup(state)

    k = int(state.tr_idx[0])
    nstats = max(int(state.iacc[9]), 1)
    return RunResult(
        station_ids=tuple(s.id for s in cfg.stations),
        policy_names=tuple(rp.name for rp in state.resolved),
        tau=tb.tau,
        delivered_bits=state.delivered.copy(),
        elapsed_slots=int(state.iacc[8]),
        contention_slots=int(state.iacc[0]),
        empty_slots=int(state.iacc[1]),
        collisions=int(state.iacc[2]),
        success_skip=int(state.iacc[3]),
        success_tx=int(state.iacc[4]),
        outages=int(state.iacc[5]),
        collision_occupancy=int(state.iacc[6]),
        success_occupancy=int(state.iacc[7]),
        p_i_mean=state.psum / nstats,
        threshold_mean=state.thrsum / nstats,
        trace_slots=state.tr_slot[:k].copy(),
        trace_p=state.tr_p[:k].copy(),
        trace_threshold=state.tr_thr[:k].copy(),
        trace_bits=state.tr_bits[:k].copy(),
        config=cfg,
    )
