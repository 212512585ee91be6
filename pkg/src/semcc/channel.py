"""Air-to-ground downlink channel model.

Large-scale fading combines free-space path loss with an elevation-dependent
probabilistic LoS/NLoS excess-loss mix; small-scale fading is Rayleigh
(exponential power). Rates are Shannon capacities per resource block, with
multicast limited by the weakest group member. All quantities are linear
scale; dB conversions belong in config parsing, not here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

# Latency assigned to a transmission whose rate is zero (nothing ever arrives).
FAILURE_LATENCY_S = math.inf


@dataclass(frozen=True)
class ChannelParams:
    """Physical-layer constants, all linear scale.

    Defaults: 2.4 GHz carrier, dense-urban LoS curve (a=9.61, b=0.16),
    1 dB / 20 dB LoS / NLoS excess loss, -174 dBm/Hz noise density, one
    180 kHz resource block bandwidth, 2 W total power, 256-bit messages
    and 20 ms TTIs.
    """

    carrier_freq_hz: float = 2.4e9
    light_speed_m_s: float = 3.0e8
    a_env: float = 9.61
    b_env: float = 0.16
    eta_los: float = 10.0 ** (-1.0 / 10.0)    # 1 dB excess loss
    eta_nlos: float = 10.0 ** (-20.0 / 10.0)  # 20 dB excess loss
    noise_psd_w_hz: float = 10.0 ** ((-174.0 - 30.0) / 10.0)  # -174 dBm/Hz
    rb_bandwidth_hz: float = 180e3
    total_power_w: float = 2.0
    n_rb: int = 5
    msg_bits: int = 256
    tti_s: float = 0.02

    def __post_init__(self):
        if self.carrier_freq_hz <= 0 or self.light_speed_m_s <= 0:
            raise ValueError("carrier frequency and light speed must be positive")
        if self.a_env <= 0 or self.b_env <= 0:
            raise ValueError("LoS shape parameters a, b must be positive")
        if not (0.0 < self.eta_los <= 1.0):
            raise ValueError(f"eta_los must be in (0, 1], got {self.eta_los}")
        if not (0.0 < self.eta_nlos <= 1.0):
            raise ValueError(f"eta_nlos must be in (0, 1], got {self.eta_nlos}")
        if self.noise_psd_w_hz <= 0 or self.rb_bandwidth_hz <= 0:
            raise ValueError("noise PSD and RB bandwidth must be positive")
        if self.total_power_w <= 0 or self.n_rb < 1:
            raise ValueError("need positive power budget and at least one RB")
        if self.msg_bits <= 0 or self.tti_s <= 0:
            raise ValueError("message size and TTI duration must be positive")

    @property
    def rb_power_w(self) -> float:
        """Per-RB transmit power under a uniform split of the budget."""
        return self.total_power_w / self.n_rb

    @property
    def noise_power_w(self) -> float:
        """AWGN power per RB: noise PSD times RB bandwidth."""
        return self.noise_psd_w_hz * self.rb_bandwidth_hz


@dataclass(frozen=True)
class UavGeometry:
    """One UAV's position relative to the base station at the origin.

    Distance and elevation are derived from the position on construction;
    a UAV exactly overhead (x = y = 0) has elevation 90 degrees.
    """

    position_m: np.ndarray
    distance_m: float = field(init=False)
    elevation_deg: float = field(init=False)

    def __post_init__(self):
        pos = np.asarray(self.position_m, dtype=float)
        if pos.shape != (3,):
            raise ValueError(f"position must be a 3-vector, got shape {pos.shape}")
        if pos[2] <= 0:
            raise ValueError(f"altitude must be positive, got {pos[2]}")
        object.__setattr__(self, "position_m", pos)
        d = float(np.linalg.norm(pos))
        object.__setattr__(self, "distance_m", d)
        object.__setattr__(
            self, "elevation_deg", math.degrees(math.asin(min(1.0, pos[2] / d)))
        )

    def within(self, radius_m: float, max_alt_m: float) -> bool:
        x, y, z = self.position_m
        return x * x + y * y <= radius_m * radius_m and 0.0 < z <= max_alt_m


@dataclass(frozen=True)
class ChannelRealization:
    """Instantaneous per-UAV, per-RB channel power gains and SNRs for one TTI."""

    gain: np.ndarray  # (K, N) linear power gains
    snr: np.ndarray   # (K, N) linear SNRs

    def __post_init__(self):
        if self.gain.shape != self.snr.shape or self.gain.ndim != 2:
            raise ValueError("gain and snr must be matching (K, N) matrices")
        if not (np.all(np.isfinite(self.gain)) and np.all(self.gain > 0)):
            raise ValueError("channel gains must be finite and positive")


def los_probability(elevation_deg, params: ChannelParams):
    """LoS probability at the given elevation angle in degrees.

    Logistic in elevation: 1 / (1 + a exp(-b (delta - a))). Accepts scalars
    or arrays; rejects angles outside [0, 90].
    """
    delta = np.asarray(elevation_deg, dtype=float)
    if np.any(delta < 0.0) or np.any(delta > 90.0):
        raise ValueError(f"elevation must lie in [0, 90] degrees, got {elevation_deg}")
    p = 1.0 / (1.0 + params.a_env * np.exp(-params.b_env * (delta - params.a_env)))
    return float(p) if np.isscalar(elevation_deg) else p


def large_scale_gain(geom: UavGeometry, params: ChannelParams) -> float:
    """Mean linear power gain: free-space path gain times the LoS/NLoS excess-loss mix."""
    if geom.distance_m <= 0.0:
        raise ValueError("distance must be positive (path loss singular at zero)")
    fspl_gain = (
        4.0 * math.pi * params.carrier_freq_hz * geom.distance_m / params.light_speed_m_s
    ) ** -2
    p_los = los_probability(geom.elevation_deg, params)
    return fspl_gain * (p_los * params.eta_los + (1.0 - p_los) * params.eta_nlos)


def sample_small_scale(rng: np.random.Generator, size=None):
    """Rayleigh small-scale fading power: unit-mean exponential draws, strictly positive."""
    s = rng.exponential(1.0, size=size)
    # exponential() can return exactly 0.0; nudge to keep gains strictly positive
    return np.maximum(s, np.finfo(float).tiny)


def realize_channel(
    geoms: list[UavGeometry], params: ChannelParams, rng: np.random.Generator
) -> ChannelRealization:
    """Draw one TTI's (K, N) gain and SNR matrices for the given UAV geometries."""
    if not geoms:
        raise ValueError("need at least one UAV geometry")
    k, n = len(geoms), params.n_rb
    mean_gain = np.array([large_scale_gain(g, params) for g in geoms])
    gain = mean_gain[:, None] * sample_small_scale(rng, size=(k, n))
    snr = params.rb_power_w * gain / params.noise_power_w
    return ChannelRealization(gain=gain, snr=snr)


def unicast_rate(snr: float, params: ChannelParams) -> float:
    """Shannon rate in bits/s on one RB for a single recipient."""
    if snr < 0.0:
        raise ValueError(f"SNR must be nonnegative, got {snr}")
    return params.rb_bandwidth_hz * math.log2(1.0 + snr)


def multicast_rate(member_snrs, params: ChannelParams) -> float:
    """Shannon rate in bits/s on one RB serving a group, limited by the worst member."""
    snrs = list(member_snrs)
    if len(snrs) < 2:
        raise ContractError(f"multicast groups need at least two members, got {len(snrs)}")
    return unicast_rate(min(snrs), params)


def transmission_latency(rate_bps: float, params: ChannelParams) -> float:
    """Seconds to deliver one message at the given rate; infinite when the rate is zero."""
    if rate_bps < 0.0:
        raise ValueError(f"rate must be nonnegative, got {rate_bps}")
    if rate_bps == 0.0:
        return FAILURE_LATENCY_S
    return params.msg_bits / rate_bps


def transmission_succeeds(latency_s: float, params: ChannelParams) -> bool:
    """A transmission succeeds iff it completes within one TTI."""
    return latency_s <= params.tti_s
