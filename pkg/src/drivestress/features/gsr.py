"""Skin conductance response detection on the GSR first derivative."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

MIN_PROMINENCE = 0.01  # normalized units per second
MIN_SEPARATION_S = 1.0


@dataclass(frozen=True)
class GsrPeak:
    onset_index: int
    peak_index: int
    height: float
    duration_s: float
    prominence: float


def derivative(x, sample_rate_hz: float) -> np.ndarray:
    """Central-difference first derivative in units per second."""
    return np.gradient(np.asarray(x, dtype=np.float64)) * sample_rate_hz


def detect_scr_peaks(
    gsr_window,
    sample_rate_hz: float,
    min_prominence: float = MIN_PROMINENCE,
    min_separation_s: float = MIN_SEPARATION_S,
) -> list[GsrPeak]:
    """Rising-edge peaks of the GSR derivative.

    The derivative is clipped at zero first: a response is a rise, and with a
    non-negative baseline a peak's prominence cannot exceed its height.
    Duration is the width at half prominence.
    """
    x = np.asarray(gsr_window, dtype=np.float64)
    if len(x) < 3:
        return []
    rising = np.maximum(derivative(x, sample_rate_hz), 0.0)
    distance = max(1, int(round(min_separation_s * sample_rate_hz)))
    idx, props = find_peaks(rising, prominence=min_prominence, distance=distance, width=0.0, rel_height=0.5)
    found = [
        GsrPeak(
            onset_index=int(props["left_bases"][j]),
            peak_index=int(i),
            height=float(rising[i]),
            duration_s=float(props["widths"][j] / sample_rate_hz),
            prominence=float(props["prominences"][j]),
        )
        for j, i in enumerate(idx)
        if rising[i] > 0 and props["widths"][j] > 0
    ]
    # Maxima not separated by a dip of at least min_prominence belong to one
    # response. find_peaks gives each of several equal-height maxima on a
    # plateau its full prominence, so they are merged here (highest wins,
    # earliest on ties).
    peaks: list[GsrPeak] = []
    for p in sorted(found, key=lambda p: p.peak_index):
        if peaks:
            q = peaks[-1]
            dip = rising[q.peak_index : p.peak_index + 1].min()
            if dip > min(q.height, p.height) - min_prominence:
                if p.height > q.height:
                    peaks[-1] = p
                continue
        peaks.append(p)
    return sorted(peaks, key=lambda p: (p.onset_index, p.peak_index))


def gsr_features(gsr_window, sample_rate_hz: float, **peak_kwargs) -> np.ndarray:
    """(mean, var, peak_count, sum height, sum duration, mean prominence, var prominence)."""
    x = np.asarray(gsr_window, dtype=np.float64)
    peaks = detect_scr_peaks(x, sample_rate_hz, **peak_kwargs)
    if not peaks:
        return np.array([x.mean(), x.var(), 0.0, 0.0, 0.0, 0.0, 0.0])
    prom = np.array([p.prominence for p in peaks])
    return np.array(
        [
            x.mean(),
            x.var(),
            float(len(peaks)),
            sum(p.height for p in peaks),
            sum(p.duration_s for p in peaks),
            prom.mean(),
            prom.var(),
        ]
    )
