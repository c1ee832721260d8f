"""Instantaneous channel gains and SNR-to-rate mapping.

Fading produces a dimensionless power gain |h|^2 with unit mean; the mean
SNR rho scales it. Rates come from the Shannon capacity or from picking
the largest discrete rate strictly below the Shannon value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .rng import RngStream, next_uniform, next_exponential
from . import core


@dataclass(frozen=True)
class RateSample:
    true_rate: float  # bits/s achievable right now
    measured_rate: float  # bits/s after estimation error and back-off
    snr: float  # instantaneous rho * |h|^2


def sample_gain_iid(rng: RngStream) -> float:
    """Unit-mean exponential |h|^2 (Rayleigh amplitude), independent draws."""
    return next_exponential(rng.state)


@njit(cache=True)
def jakes_gain_parts(cos_aoa, phases, doppler, t):
    """Complex gain of the sum-of-sinusoids process at slot t."""
    re = 0.0
    im = 0.0
    for k in range(cos_aoa.shape[0]):
        theta = doppler * t * cos_aoa[k] + phases[k]
        re += math.cos(theta)
        im += math.sin(theta)
    norm = 1.0 / math.sqrt(cos_aoa.shape[0])
    return re * norm, im * norm


class JakesState:
    """Per-station time-correlated Rayleigh process.

    Equal-amplitude sinusoids with evenly spaced angles of arrival; a
    per-station random rotation of the angle grid plus random phases make
    stations independent and the ensemble autocorrelation match J0.
    """

    def __init__(self, rng: RngStream, doppler: float, oscillators: int = 16):
        self.doppler = float(doppler)
        rot = next_uniform(rng.state)
        angles = 2.0 * np.pi * (np.arange(oscillators) + rot) / oscillators
        self.cos_aoa = np.cos(angles)
        self.phases = np.array(
            [2.0 * np.pi * next_uniform(rng.state) for _ in range(oscillators)]
        )

    def complex_gain(self, t: int):
        return jakes_gain_parts(self.cos_aoa, self.phases, self.doppler, float(t))

    def gain(self, t: int) -> float:
        re, im = self.complex_gain(t)
        return re * re + im * im


def sample_gain_jakes(state: JakesState, t: int) -> float:
    return state.gain(t)


@njit(cache=True)
def shannon_rate(snr, bandwidth):
    return bandwidth * math.log2(1.0 + snr)


@njit(cache=True)
def discrete_rate(shannon_value, rates):
    """Largest listed rate strictly below the Shannon value, else 0."""
    best = 0.0
    for k in range(rates.shape[0]):
        if rates[k] < shannon_value:
            best = rates[k]
        else:
            break
    return best


def snr_to_rate(snr: float, bandwidth: float, spec: core.ChannelSpec) -> float:
    if snr < 0:
        raise ValueError("snr must be nonnegative")
    s = shannon_rate(snr, bandwidth)
    if spec.rate_map == "shannon":
        return s
    return discrete_rate(s, np.asarray(spec.rates, dtype=np.float64))


def apply_estimation(
    true_snr: float,
    spec: core.ChannelSpec,
    rng: RngStream,
    bandwidth: float = core.DEFAULT_BANDWIDTH,
) -> RateSample:
    """Measured rate after the linear estimation-error model.

    The station sees snr*(1-eps) with eps uniform on [-2m, 2m] where m is
    the mean error magnitude, maps it to a rate, then backs the rate off
    linearly by m. Overestimation (eps < -m roughly) can leave the used
    rate above the true one, which the engine treats as outage. With
    perfect estimation the measured rate equals the true rate.
    """
    true_rate = snr_to_rate(true_snr, bandwidth, spec)
    if spec.estimation == "perfect" or spec.mean_error == 0.0:
        return RateSample(true_rate, true_rate, true_snr)
    eps = 2.0 * spec.mean_error * (2.0 * next_uniform(rng.state) - 1.0)
    est = snr_to_rate(true_snr * max(1.0 - eps, 0.0), bandwidth, spec)
    return RateSample(true_rate, est * (1.0 - spec.mean_error), true_snr)
