"""Analytic solvers for the optimal static configuration.

Covers the per-station threshold fixed point, the coupled access-probability
system (pairwise ratios + empty-probability product), analytic throughput
prediction, the team/non-cooperative threshold variants and an exhaustive
grid search used as an independent benchmark.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import exp1

E = math.e
LN2 = math.log(2.0)


class DegenerateDistribution(ValueError):
    pass


# --- achievable-rate distributions ----------------------------------------


@dataclass(frozen=True)
class ConstantRate:
    """Degenerate channel: rate equals `rate` always."""

    rate: float

    def tail_prob(self, x):
        return 1.0 if x <= self.rate else 0.0

    def tail_expectation(self, x):
        return max(self.rate - x, 0.0)

    def upper_bound(self, tail=1e-9):
        return self.rate

    def mean_rate(self):
        return self.rate


@dataclass(frozen=True)
class ShannonExponential:
    """R = B*log2(1 + rho*|h|^2) with |h|^2 unit-mean exponential."""

    rho: float
    bandwidth: float = 1.0

    def _snr_at(self, x):
        return 2.0 ** (x / self.bandwidth) - 1.0

    def tail_prob(self, x):
        if x <= 0:
            return 1.0
        return math.exp(-self._snr_at(x) / self.rho)

    def tail_expectation(self, x):
        # int_x^inf P(R > r) dr via the exponential-integral identity
        x = max(x, 0.0)
        arg = 2.0 ** (x / self.bandwidth) / self.rho
        return self.bandwidth * math.exp(1.0 / self.rho) / LN2 * exp1(arg)

    def upper_bound(self, tail=1e-9):
        return self.bandwidth * math.log2(1.0 + self.rho * math.log(1.0 / tail))

    def mean_rate(self):
        return self.tail_expectation(0.0)


@dataclass(frozen=True)
class DiscreteRates:
    """Largest listed rate strictly below the Shannon value (0 if none)."""

    rho: float
    rates: tuple
    bandwidth: float = 1.0

    def _probs(self):
        # P(R = r_k) = P(S > r_k) - P(S > r_{k+1}), S the Shannon value
        s = ShannonExponential(self.rho, self.bandwidth)
        tp = [s.tail_prob(r) for r in self.rates] + [0.0]
        return [tp[k] - tp[k + 1] for k in range(len(self.rates))]

    def tail_prob(self, x):
        if x <= 0:
            return 1.0
        s = ShannonExponential(self.rho, self.bandwidth)
        for r in self.rates:
            if r >= x:
                return s.tail_prob(r)
        return 0.0

    def tail_expectation(self, x):
        return sum(
            (r - x) * p for r, p in zip(self.rates, self._probs()) if r > x
        )

    def upper_bound(self, tail=1e-9):
        return self.rates[-1]

    def mean_rate(self):
        return self.tail_expectation(0.0)


def expected_bits_above(dist, x, hold):
    """l(x): mean bits per used opportunity times the transmit probability,
    i.e. hold * E[R * 1{R >= x}]."""
    return hold * (x * dist.tail_prob(x) + dist.tail_expectation(x))


def mean_hold_time(dist, x, tau, hold):
    """T(x): mean channel occupancy per successful contention."""
    return tau + dist.tail_prob(x) * hold


# --- solvers ----------------------------------------------------------------


def solve_threshold(dist, tau, hold, success_prob=1.0 / E) -> float:
    """Unique R* with E[(R - R*)+] = R* * tau / (hold * success_prob).

    Bisection; the left side decreases to 0, the right side grows linearly.
    """
    if not (tau > 0 and hold > 0):
        raise ValueError("tau and hold must be positive")
    if not (0 < success_prob <= 1):
        raise ValueError("success_prob outside (0,1]")
    if dist.tail_expectation(0.0) <= 0:
        raise DegenerateDistribution("rate distribution has no mass above 0")
    slope = tau / (hold * success_prob)
    f = lambda x: dist.tail_expectation(x) - x * slope
    lo, hi = 0.0, dist.upper_bound(1e-12) + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(hi, 1.0):
            break
    return 0.5 * (lo + hi)


def solve_access_probabilities(hold_times, tau) -> list:
    """Unique p with p_i/p_j = (T_j + (e-1)tau)/(T_i + (e-1)tau) and
    prod(1 - p_i) = 1/e, found by monotone bisection on p_1."""
    T = list(hold_times)
    if any(t < tau for t in T):
        raise ValueError("hold times must be >= tau")
    c = (E - 1.0) * tau
    w = [(T[0] + c) / (t + c) for t in T]  # p_i = w_i * p1
    # keep every p_i inside (0,1)
    hi = min(1.0 / wi for wi in w) * (1.0 - 1e-12)
    lo = 1e-15

    def logprod(p1):
        return sum(math.log1p(-wi * p1) for wi in w) + 1.0

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if logprod(mid) > 0:
            lo = mid
        else:
            hi = mid
    p1 = 0.5 * (lo + hi)
    return [min(max(wi * p1, 0.0), 1.0) for wi in w]


@dataclass(frozen=True)
class StaticConfiguration:
    """A complete static operating point for a station population."""

    p: tuple
    thresholds: tuple
    hold_times: tuple
    predicted_rates: tuple

    @property
    def sum_log(self):
        if any(r <= 0 for r in self.predicted_rates):
            return -math.inf
        return sum(math.log(r) for r in self.predicted_rates)


def predict_throughput(p, thresholds, dists, tau, hold):
    """Analytic per-station throughput of a static configuration."""
    p = list(p)
    n = len(p)
    prod_all = 1.0
    for pi in p:
        prod_all *= 1.0 - pi
    p_si = []
    for i in range(n):
        rest = prod_all / (1.0 - p[i]) if p[i] < 1.0 else _prod_except(p, i)
        p_si.append(p[i] * rest)
    p_s = sum(p_si)
    T = [mean_hold_time(d, x, tau, hold) for d, x in zip(dists, thresholds)]
    l = [expected_bits_above(d, x, hold) for d, x in zip(dists, thresholds)]
    denom = sum(ps * t for ps, t in zip(p_si, T)) + (1.0 - p_s) * tau
    return [ps * li / denom for ps, li in zip(p_si, l)]


def _prod_except(p, i):
    out = 1.0
    for j, pj in enumerate(p):
        if j != i:
            out *= 1.0 - pj
    return out


def make_static_configuration(p, thresholds, dists, tau, hold) -> StaticConfiguration:
    rates = predict_throughput(p, thresholds, dists, tau, hold)
    T = [mean_hold_time(d, x, tau, hold) for d, x in zip(dists, thresholds)]
    return StaticConfiguration(tuple(p), tuple(thresholds), tuple(T), tuple(rates))


def solve_static_optimal(dists, tau, hold) -> StaticConfiguration:
    """Analytic proportional-fair operating point: per-station threshold
    fixed points at success probability 1/e, then the access-probability
    system for the resulting hold times."""
    thresholds = [solve_threshold(d, tau, hold, 1.0 / E) for d in dists]
    T = [mean_hold_time(d, x, tau, hold) for d, x in zip(dists, thresholds)]
    p = solve_access_probabilities(T, tau)
    return make_static_configuration(p, thresholds, dists, tau, hold)


def tdos_threshold(dists, p, tau, hold) -> float:
    """Common threshold maximizing total throughput for given access
    probabilities: solves the population-weighted stopping equation."""
    n = len(dists)
    p_si = [p[i] * _prod_except(p, i) for i in range(n)]
    p_s = sum(p_si)
    if p_s <= 0:
        raise ValueError("need a positive total success probability")
    if all(d.tail_expectation(0.0) <= 0 for d in dists):
        raise DegenerateDistribution("no rate mass in any distribution")
    weights = [ps / p_s for ps in p_si]
    slope = tau / (hold * p_s)
    f = lambda x: sum(w * d.tail_expectation(x) for w, d in zip(weights, dists)) - x * slope
    lo, hi = 0.0, max(d.upper_bound(1e-12) for d in dists) + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ndos_threshold(dist, own_success_prob, tau, hold) -> float:
    """Local best-response threshold given how often the station's own
    successful contentions arrive."""
    return solve_threshold(dist, tau, hold, own_success_prob)


def optimize_uniform_p(dists, tau, hold, collision_slots=1.0, threshold=0.0):
    """Best common access probability for a never-skip policy, accounting
    for the collision cost (1 slot when everyone probes, a full frame for
    CSMA-style blind transmissions). Maximizes sum(log r)."""
    n = len(dists)
    T = [mean_hold_time(d, threshold, tau, hold) for d in dists]
    l = [expected_bits_above(d, threshold, hold) for d in dists]

    def neg_obj(p):
        pe = (1.0 - p) ** n
        psi = p * (1.0 - p) ** (n - 1)
        ps = n * psi
        pc = 1.0 - pe - ps
        denom = psi * sum(T) + pe * tau + pc * collision_slots * tau
        if denom <= 0:
            return math.inf
        obj = sum(math.log(psi * li / denom) for li in l if li > 0)
        return -obj

    res = minimize_scalar(neg_obj, bounds=(1e-6, 1.0 - 1e-6), method="bounded",
                          options={"xatol": 1e-10})
    return float(res.x)


def grid_search_static(dists, tau, hold, grid_spec=None) -> tuple:
    """Exhaustive proportional-fairness search over (p, threshold) grids.

    Stations with identical distributions share one (p, threshold) pair.
    grid_spec maps nothing special: {"p": per-class p arrays, "thr": per-class
    threshold arrays} or None for an automatic grid. Returns
    (StaticConfiguration, best objective).
    """
    classes = []
    index = []  # class id per station
    for d in dists:
        for ci, (dc, _) in enumerate(classes):
            if dc == d:
                classes[ci] = (dc, classes[ci][1] + 1)
                index.append(ci)
                break
        else:
            index.append(len(classes))
            classes.append((d, 1))
    C = len(classes)
    n = len(dists)
    counts = [cnt for _, cnt in classes]

    if grid_spec is None:
        p_grids = []
        thr_grids = []
        for d, _ in classes:
            p_grids.append(np.linspace(0.3 / n, 3.0 / n, 16).clip(1e-6, 0.999))
            thr_grids.append(np.linspace(0.0, 0.6 * d.upper_bound(1e-3), 16))
    else:
        p_grids = [np.asarray(g, dtype=float) for g in grid_spec["p"]]
        thr_grids = [np.asarray(g, dtype=float) for g in grid_spec["thr"]]
    if any(g.size == 0 for g in p_grids + thr_grids):
        raise ValueError("empty grid")

    # per-class hold time and bits tables over the threshold grids
    T_tab = [
        np.array([mean_hold_time(d, x, tau, hold) for x in thr_grids[c]])
        for c, (d, _) in enumerate(classes)
    ]
    l_tab = [
        np.array([expected_bits_above(d, x, hold) for x in thr_grids[c]])
        for c, (d, _) in enumerate(classes)
    ]

    shapes = [
        tuple(len(thr_grids[c]) if k == c else 1 for k in range(C)) for c in range(C)
    ]
    logl_b = []
    T_b = []
    for c in range(C):
        with np.errstate(divide="ignore"):
            logl_b.append(np.log(l_tab[c]).reshape(shapes[c]))
        T_b.append(T_tab[c].reshape(shapes[c]))

    best = (-np.inf, None, None)
    for p_combo in itertools.product(*p_grids):
        p_sc = []
        for c in range(C):
            rest = p_combo[c]
            for k in range(C):
                m = counts[k] - 1 if k == c else counts[k]
                if m:
                    rest *= (1.0 - p_combo[k]) ** m
            p_sc.append(rest)
        if any(ps <= 0.0 for ps in p_sc):
            continue
        p_s = sum(counts[c] * p_sc[c] for c in range(C))
        denom = (1.0 - p_s) * tau
        for c in range(C):
            denom = denom + counts[c] * p_sc[c] * T_b[c]
        obj = -n * np.log(denom)
        for c in range(C):
            obj = obj + counts[c] * (math.log(p_sc[c]) + logl_b[c])
        flat = int(np.argmax(obj))
        val = float(obj.reshape(-1)[flat])
        if val > best[0]:
            idx = np.unravel_index(flat, obj.shape)
            best = (val, p_combo, tuple(thr_grids[c][idx[c]] for c in range(C)))

    val, p_combo, thr_combo = best
    p = [p_combo[index[i]] for i in range(n)]
    thr = [thr_combo[index[i]] for i in range(n)]
    return make_static_configuration(p, thr, dists, tau, hold), val
