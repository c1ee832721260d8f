"""Shared domain types, scenario validation and controller gain derivation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

E = math.e

#: default data-transmission duration in units of tau
DEFAULT_HOLD_OVER_TAU = 10.0
#: default channel bandwidth in Hz
DEFAULT_BANDWIDTH = 1e7
#: default smoothing weight for both control loops
DEFAULT_ALPHA = 1e-4
#: default signal-to-noise gain target for both control loops
DEFAULT_G = 1e2


class ScenarioError(ValueError):
    """Raised by validate_scenario; carries the full list of violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class TimeBase:
    """Slot timing: tau seconds per mini slot, hold seconds per data transmission."""

    tau: float = 1.0
    hold: float = 1.0 * DEFAULT_HOLD_OVER_TAU

    @property
    def hold_slots(self) -> int:
        return int(round(self.hold / self.tau))

    def check(self):
        errs = []
        if not (self.tau > 0 and math.isfinite(self.tau)):
            errs.append("tau must be positive and finite")
        if not (self.hold > 0 and math.isfinite(self.hold)):
            errs.append("hold must be positive and finite")
        if not errs and not math.isfinite(self.hold / self.tau):
            errs.append("hold/tau must be finite")
        return errs


@dataclass(frozen=True)
class ControllerGains:
    """Derived proportional gains and smoothing weights for the two loops.

    k_p drives the access-probability loop, k_r the rate-threshold loop.
    The four bound values that produced each min() are kept for reporting.
    """

    k_p: float
    alpha_p: float
    g_p: float
    k_r: float
    alpha_r: float
    g_r: float
    k_p_stability: float
    k_p_noise: float
    k_r_stability: float
    k_r_noise: float

    def check(self):
        errs = []
        if not (0 < self.alpha_p <= 1):
            errs.append("alpha_p outside (0,1]")
        if not (0 < self.alpha_r <= 1):
            errs.append("alpha_r outside (0,1]")
        if not (self.k_p > 0 and self.k_r > 0):
            errs.append("gains must be positive")
        return errs

    def scaled(self, factor: float) -> "ControllerGains":
        """Scale both gain/weight pairs (used by the stability experiments)."""
        return replace(
            self,
            k_p=self.k_p * factor,
            alpha_p=min(self.alpha_p * factor, 1.0),
            k_r=self.k_r * factor,
            alpha_r=min(self.alpha_r * factor, 1.0),
        )


def derive_controller_gains(
    tb: TimeBase,
    alpha_p: float = DEFAULT_ALPHA,
    g_p: float = DEFAULT_G,
    alpha_r: float = DEFAULT_ALPHA,
    g_r: float = DEFAULT_G,
) -> ControllerGains:
    """Closed-form gain bounds; the binding (smaller) bound sets each gain.

    The stability bounds come from keeping the worst-case closed-loop pole
    inside the unit circle (Ziegler-Nichols halving applied); the noise
    bounds enforce the configured signal-over-noise power ratio at the
    controller output.
    """
    if not (0 < alpha_p <= 1 and 0 < alpha_r <= 1):
        raise ValueError("alpha values must lie in (0, 1]")
    if g_p < 1 or g_r < 1:
        raise ValueError("noise-gain targets must be >= 1")
    tau, hold = tb.tau, tb.hold
    k_p_max = (2.0 - alpha_p) / (alpha_p * (hold + E * tau))
    k_p_stability = k_p_max / 2.0
    k_p_noise = (1.0 - alpha_p / 2.0) / (g_p * alpha_p * (hold + E * tau))
    k_r_stability = (2.0 - alpha_r) / (2.0 * alpha_r * (1.0 + E * tau / hold))
    k_r_noise = E * tau * (1.0 - alpha_r / 2.0) / (hold * alpha_r * g_r)
    return ControllerGains(
        k_p=min(k_p_noise, k_p_stability),
        alpha_p=alpha_p,
        g_p=g_p,
        k_r=min(k_r_noise, k_r_stability),
        alpha_r=alpha_r,
        g_r=g_r,
        k_p_stability=k_p_stability,
        k_p_noise=k_p_noise,
        k_r_stability=k_r_stability,
        k_r_noise=k_r_noise,
    )


def p_to_contention_window(p: float) -> float:
    """Map an access probability to the equivalent fixed contention window."""
    if not (0 < p <= 1):
        raise ValueError(f"access probability {p} outside (0, 1]")
    return 2.0 / p - 1.0


# --- station and scenario description -------------------------------------

SATURATED = "saturated"


@dataclass(frozen=True)
class Traffic:
    """Offered load: saturated, fixed bit rate, or a fraction of saturation."""

    kind: str = SATURATED  # saturated | rate | fraction
    rate_bps: float = 0.0
    fraction: float = 0.0

    def check(self):
        errs = []
        if self.kind not in (SATURATED, "rate", "fraction"):
            errs.append(f"unknown traffic kind {self.kind!r}")
        if self.kind == "rate" and not self.rate_bps > 0:
            errs.append("traffic rate must be positive")
        if self.kind == "fraction" and not (0 < self.fraction < 1):
            errs.append(f"fraction {self.fraction} outside (0,1)")
        return errs


@dataclass(frozen=True)
class Radio:
    """Mean-SNR source: a fixed rho, optionally stepped mid-run, or mobility."""

    rho: float = 1.0
    # optional drastic SNR step: (slot, new rho)
    step: tuple | None = None
    mobility: object | None = None  # mobility.MobilitySpec when moving

    def check(self):
        errs = []
        if self.mobility is None and not self.rho > 0:
            errs.append("rho must be positive")
        if self.step is not None:
            slot, rho2 = self.step
            if slot < 0 or not rho2 > 0:
                errs.append("invalid SNR step")
        return errs


@dataclass(frozen=True)
class PolicySpec:
    name: str = "ados"
    params: dict = field(default_factory=dict)

    KNOWN = (
        "ados",
        "static_optimal",
        "non_opportunistic",
        "csma_ca",
        "tdos",
        "ndos",
        "static_ados",
        "oracle_tracking",
    )

    def check(self):
        if self.name not in self.KNOWN:
            return [f"unknown policy {self.name!r}"]
        return []


@dataclass(frozen=True)
class StationSpec:
    id: int
    radio: Radio = field(default_factory=Radio)
    traffic: Traffic = field(default_factory=Traffic)
    policy: PolicySpec = field(default_factory=PolicySpec)


@dataclass(frozen=True)
class ChannelSpec:
    """Fading process, SNR-to-rate map and estimation model for a run."""

    fading: str = "iid"  # iid | jakes
    doppler: float = 2.0 * math.pi / 100.0  # radians per mini slot, jakes only
    oscillators: int = 16
    rate_map: str = "shannon"  # shannon | discrete
    rates: tuple = ()  # ascending bits/s, discrete map only
    estimation: str = "perfect"  # perfect | linear
    mean_error: float = 0.0  # epsilon-bar, linear estimation only

    def check(self):
        errs = []
        if self.fading not in ("iid", "jakes"):
            errs.append(f"unknown fading model {self.fading!r}")
        if self.rate_map not in ("shannon", "discrete"):
            errs.append(f"unknown rate map {self.rate_map!r}")
        if self.rate_map == "discrete":
            r = list(self.rates)
            if not r or any(x <= 0 for x in r) or any(b <= a for a, b in zip(r, r[1:])):
                errs.append("discrete rates must be positive and strictly ascending")
        if self.estimation not in ("perfect", "linear"):
            errs.append(f"unknown estimation model {self.estimation!r}")
        if self.estimation == "linear" and not (0 <= self.mean_error < 1):
            errs.append("mean estimation error outside [0,1)")
        if self.fading == "jakes" and self.oscillators < 1:
            errs.append("jakes oscillator count must be >= 1")
        return errs


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete, validated description of one experiment."""

    stations: tuple
    time_base: TimeBase = field(default_factory=TimeBase)
    bandwidth: float = DEFAULT_BANDWIDTH
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    horizon: int = 1_000_000
    warmup: int = 100_000
    seed: int = 1
    gains: ControllerGains | str = "derive"
    gain_scale: float = 1.0
    sampling: int = 1000
    validated: bool = False


def validate_scenario(raw: ScenarioConfig) -> ScenarioConfig:
    """Normalize a scenario: fill defaults, derive gains, check invariants.

    Returns a config marked validated; validating it again is a no-op.
    Raises ScenarioError listing every violation found.
    """
    if raw.validated:
        return raw
    errs = []
    errs += raw.time_base.check()
    if not raw.bandwidth > 0:
        errs.append("bandwidth must be positive")
    if not raw.stations:
        errs.append("scenario needs at least one station")
    ids = [s.id for s in raw.stations]
    for sid in sorted({i for i in ids if ids.count(i) > 1}):
        errs.append(f"duplicate station id {sid}")
    for s in raw.stations:
        for msg in s.radio.check() + s.traffic.check() + s.policy.check():
            errs.append(f"station {s.id}: {msg}")
    errs += raw.channel.check()
    if raw.warmup < 0 or raw.horizon <= raw.warmup:
        errs.append("need horizon > warmup >= 0")
    if raw.sampling < 1:
        errs.append("sampling period must be >= 1 slot")
    if not raw.gain_scale > 0:
        errs.append("gain scale must be positive")
    gains = raw.gains
    if gains == "derive":
        if not raw.time_base.check():
            gains = derive_controller_gains(raw.time_base)
    elif isinstance(gains, ControllerGains):
        errs += gains.check()
    else:
        errs.append(f"gains must be 'derive' or ControllerGains, got {gains!r}")
    if errs:
        raise ScenarioError(errs)
    if raw.gain_scale != 1.0:
        gains = gains.scaled(raw.gain_scale)
    return replace(raw, stations=tuple(raw.stations), gains=gains, validated=True)
