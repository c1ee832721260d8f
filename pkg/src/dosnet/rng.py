"""Deterministic per-(seed, station, purpose) random substreams.

xorshift128+ states initialized through splitmix64 so that every
(seed, station, purpose) triple gets an independent, reproducible stream.
The njit helpers are shared with the simulation kernel.
"""

from __future__ import annotations

import numpy as np
from numba import njit

PURPOSES = ("contention", "fading", "estimation", "mobility", "traffic")
PURPOSE_INDEX = {name: i for i, name in enumerate(PURPOSES)}

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, inline="always")
def _splitmix64(x):
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK
    z = x
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK
    return z ^ (z >> np.uint64(31)), x


@njit(cache=True)
def stream_state(seed, station, purpose):
    """Initial xorshift128+ state for one substream."""
    x = (
        np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15)
        ^ np.uint64(station + 1) * np.uint64(0xD1B54A32D192ED03)
        ^ np.uint64(purpose + 1) * np.uint64(0x8CB92BA72F3D8DD7)
    ) & _MASK
    s0, x = _splitmix64(x)
    s1, x = _splitmix64(x)
    if s0 == np.uint64(0) and s1 == np.uint64(0):
        s1 = np.uint64(1)
    out = np.empty(2, dtype=np.uint64)
    out[0] = s0
    out[1] = s1
    return out


@njit(cache=True, inline="always")
def next_u64(state):
    s1 = state[0]
    s0 = state[1]
    state[0] = s0
    s1 ^= (s1 << np.uint64(23)) & _MASK
    s1 = s1 ^ s0 ^ (s1 >> np.uint64(17)) ^ (s0 >> np.uint64(26))
    state[1] = s1
    return (s1 + s0) & _MASK


@njit(cache=True, inline="always")
def next_uniform(state):
    """Uniform in [0, 1) with 53 random bits."""
    return (next_u64(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def next_exponential(state):
    """Unit-mean exponential variate."""
    u = next_uniform(state)
    return -np.log(1.0 - u)


class RngStream:
    """Python-side view of one substream (tests, setup-time draws)."""

    def __init__(self, seed: int, station: int, purpose):
        if isinstance(purpose, str):
            purpose = PURPOSE_INDEX[purpose]
        self.state = stream_state(seed, station, purpose)

    def uniform(self, n: int | None = None):
        if n is None:
            return next_uniform(self.state)
        return np.array([next_uniform(self.state) for _ in range(n)])

    def exponential(self, n: int | None = None):
        if n is None:
            return next_exponential(self.state)
        return np.array([next_exponential(self.state) for _ in range(n)])


def rng_stream(seed: int, station_id: int, purpose) -> RngStream:
    """Independent, reproducible substream for (seed, station, purpose)."""
    return RngStream(seed, station_id, purpose)
