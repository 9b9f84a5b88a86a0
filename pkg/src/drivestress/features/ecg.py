"""R-peak detection (derivative, squaring, moving-window integration,
adaptive threshold) and NN-interval cleaning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from ..errors import InsufficientBeats

REFRACTORY_S = 0.25
INTEGRATION_S = 0.150
T_WAVE_WINDOW_S = 0.36
NN_MIN_MS = 250.0
NN_MAX_MS = 3000.0
MAX_MEDIAN_DEVIATION = 0.4  # fraction of the median NN
MIN_INTERVALS = 4


@dataclass(frozen=True)
class NnSeries:
    """Detected beats and the cleaned NN intervals.

    ``nn_times_s[i]`` is the time of the beat closing ``nn_intervals_ms[i]``;
    intervals removed by cleaning leave gaps in both arrays.
    """

    r_peak_times_s: np.ndarray
    nn_intervals_ms: np.ndarray
    nn_times_s: np.ndarray

    @classmethod
    def from_intervals(cls, nn_ms) -> "NnSeries":
        nn = np.asarray(nn_ms, dtype=np.float64)
        times = np.concatenate(([0.0], np.cumsum(nn) / 1000.0))
        return cls(times, nn, times[1:])


def _slope(x: np.ndarray, fs: float) -> np.ndarray:
    # centred five-point derivative: (x[n+2] + 2x[n+1] - 2x[n-1] - x[n-2]) / 8T
    kernel = np.array([1.0, 2.0, 0.0, -2.0, -1.0]) * fs / 8.0
    return np.convolve(x, kernel, mode="same")


def _refine(x: np.ndarray, i: int) -> float:
    if i <= 0 or i >= len(x) - 1:
        return float(i)
    y0, y1, y2 = x[i - 1], x[i], x[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom >= 0:
        return float(i)
    return i + 0.5 * (y0 - y2) / denom


def r_peak_times(ecg_window, sample_rate_hz: float, refractory_s: float = REFRACTORY_S) -> np.ndarray:
    """Times (s, from window start) of detected R peaks."""
    x = np.asarray(ecg_window, dtype=np.float64)
    fs = float(sample_rate_hz)
    if len(x) < 5 or np.ptp(x) == 0:
        return np.empty(0)
    w = max(1, int(round(INTEGRATION_S * fs)))
    mwi = np.convolve(_slope(x, fs) ** 2, np.ones(w) / w, mode="same")
    refractory = max(1, int(round(refractory_s * fs)))
    cand, _ = find_peaks(mwi, distance=refractory)
    if cand.size == 0:
        return np.empty(0)

    head = mwi[: max(1, int(2 * fs))]
    spk = 0.5 * head.max()
    npk = 0.5 * head.mean()
    t_wave = int(round(T_WAVE_WINDOW_S * fs))
    beats: list[int] = []
    last_height = 0.0
    for c in cand:
        h = mwi[c]
        thr = npk + 0.25 * (spk - npk)
        is_t_wave = beats and c - beats[-1] <= t_wave and h < 0.5 * last_height
        if h > thr and not is_t_wave and (not beats or c - beats[-1] >= refractory):
            beats.append(int(c))
            last_height = h
            spk = 0.125 * h + 0.875 * spk
        else:
            npk = 0.125 * h + 0.875 * npk

    # integration blurs the position; re-locate on the ECG itself
    half = max(1, w)
    times = []
    for b in beats:
        lo, hi = max(0, b - half), min(len(x), b + half + 1)
        i = lo + int(np.argmax(x[lo:hi]))
        t = _refine(x, i) / fs
        if not times or t - times[-1] >= refractory_s:
            times.append(t)
    return np.asarray(times)


def clean_nn(times_s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """NN intervals with implausible ones and both their neighbours removed."""
    nn = np.diff(times_s) * 1000.0
    if nn.size == 0:
        return nn, nn
    bad = (nn < NN_MIN_MS) | (nn > NN_MAX_MS)
    plausible = nn[~bad]
    if plausible.size:
        med = np.median(plausible)
        bad |= np.abs(nn - med) > MAX_MEDIAN_DEVIATION * med
    drop = bad.copy()
    drop[1:] |= bad[:-1]
    drop[:-1] |= bad[1:]
    keep = ~drop
    return nn[keep], times_s[1:][keep]


def detect_r_peaks(ecg_window, sample_rate_hz: float) -> NnSeries:
    times = r_peak_times(ecg_window, sample_rate_hz)
    nn, nn_times = clean_nn(times)
    if nn.size < MIN_INTERVALS:
        raise InsufficientBeats(f"{nn.size} valid NN intervals from {times.size} detected beats")
    return NnSeries(times, nn, nn_times)
