"""Heart-rate variability statistics from an NN series."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateSpectrum, InsufficientBeats
from .ecg import NnSeries
from .spectral import band_power, periodogram

TIME_FEATURES = (
    "mean_nn", "sdnn", "sdsd", "rmssd", "median_nn", "nn50", "pnn50", "nn20", "pnn20",
    "cvsd", "cvnn", "hr_mean", "hr_max", "hr_min", "hr_std",
)
FREQ_FEATURES = ("total_power", "vlf_power", "lf_power", "hf_power", "lf_hf_ratio", "lf_norm", "hf_norm")

VLF_HZ = (0.003, 0.04)
LF_HZ = (0.04, 0.15)
HF_HZ = (0.15, 0.40)
TOTAL_HZ = (0.003, 0.40)
TACHOGRAM_RATE_HZ = 4.0
MIN_SPAN_S = 30.0


def _as_series(nn) -> NnSeries:
    return nn if isinstance(nn, NnSeries) else NnSeries.from_intervals(nn)


def hrv_time_features(nn) -> np.ndarray:
    """The 15 time-domain values, ordered as ``TIME_FEATURES``.

    Needs at least two intervals; population standard deviations throughout.
    """
    x = _as_series(nn).nn_intervals_ms
    if x.size < 2:
        raise InsufficientBeats(f"{x.size} NN intervals; time-domain HRV needs 2")
    diff = np.diff(x)
    mean_nn = x.mean()
    rmssd = np.sqrt(np.mean(diff**2))
    sdnn = x.std()
    nn50 = float(np.count_nonzero(np.abs(diff) > 50.0))
    nn20 = float(np.count_nonzero(np.abs(diff) > 20.0))
    hr = 60000.0 / x
    hr_max, hr_min = hr.max(), hr.min()
    hr_mean = min(max(hr.mean(), hr_min), hr_max)
    return np.array(
        [
            mean_nn,
            sdnn,
            diff.std(),
            rmssd,
            np.median(x),
            nn50,
            100.0 * nn50 / diff.size,
            nn20,
            100.0 * nn20 / diff.size,
            rmssd / mean_nn,
            sdnn / mean_nn,
            hr_mean,
            hr_max,
            hr_min,
            hr.std(),
        ]
    )


def tachogram(nn, rate_hz: float = TACHOGRAM_RATE_HZ) -> tuple[np.ndarray, np.ndarray]:
    """NN values linearly interpolated onto a uniform grid over the beat times."""
    s = _as_series(nn)
    t = s.nn_times_s
    if s.nn_intervals_ms.size < 4:
        raise InsufficientBeats(f"{s.nn_intervals_ms.size} NN intervals; spectral HRV needs 4")
    span = t[-1] - t[0]
    if span < MIN_SPAN_S:
        raise InsufficientBeats(f"NN series spans {span:.1f} s; spectral HRV needs {MIN_SPAN_S:g} s")
    grid = t[0] + np.arange(int(np.floor(span * rate_hz + 1e-9)) + 1) / rate_hz
    return grid, np.interp(grid, t, s.nn_intervals_ms)


def hrv_band_powers(nn, rate_hz: float = TACHOGRAM_RATE_HZ) -> dict[str, float]:
    """total/vlf/lf/hf power (ms^2) of the resampled tachogram."""
    _, series = tachogram(nn, rate_hz)
    f, p = periodogram(series, rate_hz)
    return {
        "total_power": band_power(f, p, *TOTAL_HZ),
        "vlf_power": band_power(f, p, *VLF_HZ),
        "lf_power": band_power(f, p, *LF_HZ),
        "hf_power": band_power(f, p, *HF_HZ),
    }


def hrv_freq_features(nn, rate_hz: float = TACHOGRAM_RATE_HZ) -> np.ndarray:
    """The 7 frequency-domain values, ordered as ``FREQ_FEATURES``.

    ``lf_hf_ratio`` is 0 when HF power is 0; callers flag that case.
    """
    bp = hrv_band_powers(nn, rate_hz)
    lf, hf = bp["lf_power"], bp["hf_power"]
    if lf + hf <= 0:
        raise DegenerateSpectrum("no LF or HF power in the tachogram")
    ratio = lf / hf if hf > 0 else 0.0
    lf_norm = 100.0 * lf / (lf + hf)
    return np.array([bp["total_power"], bp["vlf_power"], lf, hf, ratio, lf_norm, 100.0 - lf_norm])
