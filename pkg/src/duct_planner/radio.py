"""Link-budget primitives: Shannon rate, free-space gain, radio horizon."""

import math
from dataclasses import dataclass

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class RadioParams:
    """Link parameters in linear units (W, Hz, m).

    dB/dBm conversions happen at construction time; the evaluation loop
    works entirely in linear units.
    """

    p_t: float          # transmit power (W)
    g_t: float          # transmit antenna gain (linear)
    g_r: float          # receive antenna gain (linear)
    bandwidth: float    # Hz
    n0: float           # noise PSD (W/Hz)
    f: float            # carrier frequency (Hz)
    z_tx: float         # transmit antenna height (m)
    z_rx: float         # receive antenna height (m)

    def __post_init__(self):
        for name in ("p_t", "g_t", "g_r", "bandwidth", "n0", "f", "z_tx", "z_rx"):
            if getattr(self, name) <= 0:
                raise ValueError(f"RadioParams.{name} must be strictly positive")

    @property
    def snr_scale(self) -> float:
        """SNR per unit channel gain: G_t * G_r * P_t / (n0 * B)."""
        return self.g_t * self.g_r * self.p_t / (self.n0 * self.bandwidth)


def free_space_path_loss_db(d: float, f: float) -> float:
    """Free-space path loss in dB at distance d (m) and carrier f (Hz)."""
    if d <= 0:
        raise ValueError("distance must be strictly positive")
    return 20.0 * math.log10(4.0 * math.pi * d * f / SPEED_OF_LIGHT)


def free_space_gain(d: float, f: float) -> float:
    """Linear power gain of the free-space channel at distance d (m)."""
    return 10.0 ** (-free_space_path_loss_db(d, f) / 10.0)


def shannon_rate(gain: float, radio: RadioParams) -> float:
    """Achievable rate (bits/s) for a linear channel power gain."""
    if gain < 0:
        raise ValueError("gain must be nonnegative")
    return radio.bandwidth * math.log2(1.0 + gain * radio.snr_scale)


def los_range(z_tx: float, z_rx: float) -> float:
    """Radio horizon in meters: 4.12 * (sqrt(z_tx) + sqrt(z_rx)) km.

    The 4.12 factor accounts for standard atmospheric refraction.
    """
    if z_tx < 0 or z_rx < 0:
        raise ValueError("antenna heights must be nonnegative")
    return 4.12 * (math.sqrt(z_tx) + math.sqrt(z_rx)) * 1000.0
