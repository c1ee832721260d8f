"""Station position processes and distance-based mean-SNR mapping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .rng import RngStream


@dataclass(frozen=True)
class MobilitySpec:
    """Position process plus the path-loss geometry shared by all kinds.

    kind 'static': stays at `start`.
    kind 'linear': constant-speed straight line start -> target over
        `duration` slots, then holds.
    kind 'waypoint': classic random waypoint in [0, area_side]^2 at
        constant `speed` (area units per slot) with `pause` slots at each
        destination.
    """

    kind: str = "static"  # static | linear | waypoint
    start: tuple = (0.0, 0.0)
    target: tuple = (0.0, 0.0)  # linear only
    duration: int = 1  # linear only, slots
    area_side: float = 1.0
    speed: float = 0.0  # area units per slot
    pause: int = 0  # slots, waypoint only
    receiver: tuple = (1.0, 1.0)
    reference_snr: float = 1.0  # rho at the reference position
    reference_position: tuple = (0.0, 0.0)
    pathloss_exponent: float = 2.0
    min_distance_fraction: float = 0.01  # cap: d_eff >= fraction * area_side

    def check(self):
        errs = []
        if self.kind not in ("static", "linear", "waypoint"):
            errs.append(f"unknown mobility kind {self.kind!r}")
        if self.speed < 0:
            errs.append("speed must be nonnegative")
        if not self.pathloss_exponent > 0:
            errs.append("path-loss exponent must be positive")
        if self.kind == "linear" and self.duration < 1:
            errs.append("linear track duration must be >= 1 slot")
        return errs


def _dist(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


class WaypointWalker:
    """Stateful random-waypoint trajectory, advanced slot-by-slot on demand."""

    def __init__(self, spec: MobilitySpec, rng: RngStream):
        self.spec = spec
        self.rng = rng
        self.pos = list(spec.start)
        self.t = 0
        self.pause_left = 0
        self._pick_destination()

    def _pick_destination(self):
        L = self.spec.area_side
        self.dest = [self.rng.uniform() * L, self.rng.uniform() * L]

    def advance_to(self, t: int):
        while self.t < t:
            self.t += 1
            if self.pause_left > 0:
                self.pause_left -= 1
                continue
            d = _dist(self.pos, self.dest)
            step = self.spec.speed
            if d <= step:
                self.pos = list(self.dest)
                self.pause_left = self.spec.pause
                self._pick_destination()
            elif d > 0:
                self.pos[0] += step * (self.dest[0] - self.pos[0]) / d
                self.pos[1] += step * (self.dest[1] - self.pos[1]) / d
        return tuple(self.pos)


def position_at(spec: MobilitySpec, t: int, rng: RngStream | None = None, walker=None):
    """Position at slot t. Waypoint trajectories need a walker (or an rng to
    build one); walkers must be advanced with nondecreasing t."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if spec.kind == "static":
        return spec.start
    if spec.kind == "linear":
        f = min(t / spec.duration, 1.0)
        return (
            spec.start[0] + f * (spec.target[0] - spec.start[0]),
            spec.start[1] + f * (spec.target[1] - spec.start[1]),
        )
    if walker is None:
        walker = WaypointWalker(spec, rng)
    return walker.advance_to(t)


def snr_from_position(spec: MobilitySpec, position) -> float:
    """Mean SNR from path loss: rho_ref * (d_ref / d_eff)^eta, with d_eff
    capped below at min_distance_fraction * area_side."""
    d_ref = _dist(spec.reference_position, spec.receiver)
    d = _dist(position, spec.receiver)
    d_min = spec.min_distance_fraction * spec.area_side
    d_eff = max(d, d_min)
    return spec.reference_snr * (d_ref / d_eff) ** spec.pathloss_exponent
