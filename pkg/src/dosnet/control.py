"""The two adaptive control loops run by every ADOS station.

Both are proportional controllers acting on an exponentially smoothed
error signal. The access-probability loop observes the number of empty
mini slots between consecutive busy slots and regulates it to 1/(e-1);
the rate-threshold loop observes the station's own excess rate above the
current threshold and regulates it to the optimal-stopping target.
Pure functions on small state tuples so the simulation kernel can mirror
them exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .core import ControllerGains, TimeBase

E = math.e

#: reference number of empty mini slots per contention interval
EMPTY_SLOT_TARGET = 1.0 / (E - 1.0)
#: smoothing weight of the online mean-hold-time estimate
HOLD_ESTIMATE_BETA = 0.01
P_MIN = 1e-6
P_MAX = 1.0


def filter_update(smoothed: float, sample: float, alpha: float) -> float:
    """One EWMA step: (1-alpha)*smoothed + alpha*sample."""
    return smoothed + alpha * (sample - smoothed)


@dataclass(frozen=True)
class AccessState:
    """Access-probability loop state for one station."""

    p: float
    error: float  # smoothed E_p
    hold_estimate: float  # online mean channel-occupancy per busy interval

    @property
    def gain(self):
        # effective proportional gain applied to the smoothed error
        return self.hold_estimate + (E - 1.0)


def init_access_state(tb: TimeBase, k_p: float, n_hint: int | None = None,
                      p0: float | None = None) -> AccessState:
    """Start the loop at a neutral point.

    p0 defaults to min(0.5, 1/n_hint) when a population hint exists,
    else 0.1; the smoothed error starts where the controller would
    already output p0, so there is no initial transient by construction.
    """
    if p0 is None:
        p0 = min(0.5, 1.0 / n_hint) if n_hint else 0.1
    p0 = min(max(p0, P_MIN), P_MAX)
    hold0 = tb.hold + tb.tau
    k_eff = k_p * (hold0 + (E - 1.0) * tb.tau)
    # p = 1 / (k_eff * err)  =>  err consistent with p0
    return AccessState(p=p0, error=1.0 / (k_eff * p0), hold_estimate=hold0 / tb.tau)


def access_update(state: AccessState, empty_slots: int, k_p: float, alpha_p: float,
                  tb: TimeBase) -> AccessState:
    """Close one contention interval: `empty_slots` idle mini slots were
    observed before the busy slot that ends the interval."""
    err = filter_update(state.error, EMPTY_SLOT_TARGET - empty_slots, alpha_p)
    t_i = k_p * tb.tau * state.gain * err
    if t_i > 0:
        p = min(max(1.0 / t_i, P_MIN), P_MAX)
    else:
        p = P_MAX
    return AccessState(p=p, error=err, hold_estimate=state.hold_estimate)


def update_hold_estimate(state: AccessState, busy_slots: float) -> AccessState:
    """Fold the observed occupancy (in mini slots) of the interval-closing
    busy period into the running mean."""
    h = filter_update(state.hold_estimate, busy_slots, HOLD_ESTIMATE_BETA)
    return replace(state, hold_estimate=h)


@dataclass(frozen=True)
class ThresholdState:
    """Rate-threshold loop state for one station."""

    threshold: float
    error: float  # smoothed E_R


def init_threshold_state() -> ThresholdState:
    return ThresholdState(threshold=0.0, error=0.0)


def threshold_update(state: ThresholdState, rate: float, k_r: float, alpha_r: float,
                     tb: TimeBase) -> ThresholdState:
    """Update on one own successful contention with measured `rate`.

    The transmit decision elsewhere uses the pre-update threshold; the
    excess above it is regulated to threshold*tau*e/hold.
    """
    excess = max(rate - state.threshold, 0.0)
    target = state.threshold * tb.tau * E / tb.hold
    err = filter_update(state.error, excess - target, alpha_r)
    return ThresholdState(threshold=max(k_r * err, 0.0), error=err)


def controller_step_reference(gains: ControllerGains, tb: TimeBase):
    """Convenience bundle of the per-loop update callables (tests, traces)."""
    acc = lambda st, empty: access_update(st, empty, gains.k_p, gains.alpha_p, tb)
    thr = lambda st, rate: threshold_update(st, rate, gains.k_r, gains.alpha_r, tb)
    return acc, thr
