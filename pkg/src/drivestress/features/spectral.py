"""One-sided periodogram and band integration."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyBand

RESP_BANDS_HZ = ((0.0, 0.1), (0.1, 0.2), (0.2, 0.3), (0.3, 0.4))


def periodogram(window, sample_rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    """Power spectral density of the mean-removed window.

    Scaled so that ``sum(P) * df`` equals the population variance of the
    window, with ``df = sample_rate_hz / len(window)``.
    """
    x = np.asarray(window, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise ValueError("periodogram needs at least two samples")
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate_hz)
    if np.ptp(x) == 0:
        return freqs, np.zeros_like(freqs)
    spec = np.fft.rfft(x - x.mean())
    power = (spec.real**2 + spec.imag**2) / (sample_rate_hz * n)
    if n % 2 == 0:
        power[1:-1] *= 2.0
    else:
        power[1:] *= 2.0
    return freqs, power


def band_power(freqs, powers, lo_hz: float, hi_hz: float) -> float:
    """Integrated power over bins with ``lo_hz <= f < hi_hz``.

    Each bin contributes ``P(f) * df`` (its own cell), so adjacent bands add
    up to the integral over their union.
    """
    freqs = np.asarray(freqs)
    powers = np.asarray(powers)
    if not lo_hz < hi_hz:
        raise ValueError(f"empty interval [{lo_hz}, {hi_hz})")
    if hi_hz > freqs[-1] + 1e-12:
        raise ValueError(f"upper edge {hi_hz} Hz exceeds maximum frequency {freqs[-1]} Hz")
    mask = (freqs >= lo_hz) & (freqs < hi_hz)
    if not mask.any():
        raise EmptyBand(f"no frequency bin in [{lo_hz}, {hi_hz}) Hz")
    df = freqs[1] - freqs[0]
    return float(max(powers[mask].sum() * df, 0.0))


def resp_features(resp_window, sample_rate_hz: float) -> np.ndarray:
    """mean, variance and the four 0.1 Hz-wide band powers up to 0.4 Hz."""
    x = np.asarray(resp_window, dtype=np.float64)
    f, p = periodogram(x, sample_rate_hz)
    bands = [band_power(f, p, lo, hi) for lo, hi in RESP_BANDS_HZ]
    return np.array([x.mean(), x.var(), *bands])
