"""Throughput, fairness and replication-aggregation metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import RunResult


def throughput(run: RunResult) -> np.ndarray:
    """Per-station delivered bits per second over the post-warmup span."""
    if run.elapsed_slots <= 0:
        raise ValueError("run has no post-warmup slots")
    return run.throughput


def jain_index(r) -> float:
    r = np.asarray(r, dtype=float)
    if r.size < 1 or np.any(r < 0) or not np.any(r > 0):
        raise ValueError("need nonnegative throughputs, not all zero")
    return float(r.sum() ** 2 / (r.size * (r * r).sum()))


def sum_log(r) -> float:
    """Proportional-fairness objective; -inf when any station is at zero."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        return -math.inf
    return float(np.log(r).sum())


@dataclass(frozen=True)
class WindowedReport:
    mean_sum_log: float
    series: np.ndarray  # sum_log per window
    starvation_count: int  # (window, station) pairs with zero throughput


def windowed_sum_log(run: RunResult, window: int) -> WindowedReport:
    """Short-term fairness: sum_log of per-window throughputs.

    Windows are cut from the sampled cumulative-bits trace, post warmup;
    `window` must be a multiple of the sampling period. Zero-throughput
    stations contribute a floor of one bit per window so the series mean
    stays finite; those events are counted separately as starvation.
    """
    if window < 1:
        raise ValueError("window must be >= 1 slot")
    sampling = run.config.sampling if run.config is not None else None
    slots = run.trace_slots
    if sampling is None or window % sampling != 0:
        raise ValueError("window must be a multiple of the sampling period")
    warmup = run.config.warmup
    mask = slots >= warmup
    s = slots[mask]
    bits = run.trace_bits[mask]
    if s.size < 2:
        raise ValueError("not enough samples for one window")
    stride = window // sampling
    idx = np.arange(0, s.size, stride)
    if idx.size < 2:
        raise ValueError("not enough samples for one window")
    cum = bits[idx]
    spans = (s[idx][1:] - s[idx][:-1]) * run.tau
    per_win = cum[1:] - cum[:-1]  # [windows, n]
    floor = 1.0  # one bit per window
    starvation = int(np.count_nonzero(per_win <= 0.0))
    per_win = np.maximum(per_win, floor)
    rates = per_win / spans[:, None]
    series = np.log(rates).sum(axis=1)
    return WindowedReport(float(series.mean()), series, starvation)


@dataclass(frozen=True)
class FairnessReport:
    per_station: np.ndarray
    total: float
    sum_log: float
    jfi: float


def fairness_report(run: RunResult) -> FairnessReport:
    r = throughput(run)
    return FairnessReport(r, float(r.sum()), sum_log(r), jain_index(r))


@dataclass(frozen=True)
class Aggregate:
    """Mean and 95% normal-approximation CI half-width over replications."""

    mean: float
    ci_halfwidth: float
    n: int

    def relative_halfwidth(self) -> float:
        if self.mean == 0:
            return math.inf
        return abs(self.ci_halfwidth / self.mean)

    def meets(self, relative_target: float) -> bool:
        return self.relative_halfwidth() <= relative_target


def aggregate(values, z: float = 1.96) -> Aggregate:
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        raise ValueError("nothing to aggregate")
    if v.size == 1:
        return Aggregate(float(v[0]), math.inf, 1)
    sem = v.std(ddof=1) / math.sqrt(v.size)
    return Aggregate(float(v.mean()), float(z * sem), int(v.size))


def ci_separated(a: Aggregate, b: Aggregate) -> bool:
    """True when the two 95% intervals do not overlap."""
    lo_a, hi_a = a.mean - a.ci_halfwidth, a.mean + a.ci_halfwidth
    lo_b, hi_b = b.mean - b.ci_halfwidth, b.mean + b.ci_halfwidth
    return hi_a < lo_b or hi_b < lo_a
