"""Normalization, Butterworth low-pass filtering and window slicing."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from . import kernels
from .errors import ConstantSignal, TooShortForFilter
from .ingest import ChannelKind, DrivingSituation, SectionAnnotation, SignalRecord

log = logging.getLogger(__name__)

DEFAULT_CUTOFFS_HZ = {
    ChannelKind.ECG: 40.0,
    ChannelKind.RESPIRATION: 10.0,
    ChannelKind.HAND_GSR: 1.0,
    ChannelKind.FOOT_GSR: 1.0,
}
FILTER_ORDER = 5
WINDOW_S = 100.0
HOP_S = 50.0


def min_max_normalize(signal) -> np.ndarray:
    """Affinely map ``signal`` onto [0, 1]."""
    x = np.asarray(signal, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two samples to normalize")
    lo, hi = x.min(), x.max()
    if not hi > lo:
        raise ConstantSignal(f"signal is constant ({lo!r}); dead sensor?")
    out = (x - lo) / (hi - lo)
    # rounding can leave the extremes one ulp off
    out[x == lo] = 0.0
    out[x == hi] = 1.0
    return out


@dataclass(frozen=True)
class FilterSpec:
    cutoff_hz: float
    sample_rate_hz: float
    order: int = FILTER_ORDER

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("filter order must be positive")
        if not (self.cutoff_hz > 0 and self.sample_rate_hz > 0):
            raise ValueError("cutoff and sample rate must be positive")

    @property
    def passthrough(self) -> bool:
        return self.cutoff_hz >= self.sample_rate_hz / 2.0


def butterworth_coefficients(spec: FilterSpec) -> tuple[np.ndarray, np.ndarray]:
    """Digital low-pass Butterworth ``(b, a)`` via the prewarped bilinear transform."""
    if spec.passthrough:
        raise ValueError("cutoff at or above Nyquist has no digital low-pass design")
    n = spec.order
    fs2 = 2.0 * spec.sample_rate_hz
    warped = fs2 * math.tan(math.pi * spec.cutoff_hz / spec.sample_rate_hz)
    k = np.arange(1, n + 1)
    analog_poles = warped * np.exp(1j * np.pi * (2 * k + n - 1) / (2 * n))
    poles = (fs2 + analog_poles) / (fs2 - analog_poles)
    gain = np.real(warped**n / np.prod(fs2 - analog_poles))
    b = gain * np.poly(-np.ones(n))
    a = np.real(np.poly(poles))
    return b / a[0], a / a[0]


def steady_state_initial(b: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Filter state for which a unit step input produces a unit-DC-gain steady output."""
    n = len(a) - 1
    companion = np.zeros((n, n))
    companion[0, :] = -a[1:]
    companion[1:, :-1] = np.eye(n - 1)
    lhs = np.eye(n) - companion.T
    rhs = b[1:] - a[1:] * b[0]
    return np.linalg.solve(lhs, rhs)


class FilterOutput(NamedTuple):
    signal: np.ndarray
    passthrough: bool


def butterworth_lowpass(signal, spec: FilterSpec, zero_phase: bool = True) -> FilterOutput:
    """Low-pass ``signal``.

    With ``zero_phase`` the filter runs forward, then backward over the
    reversed output, after odd-reflection padding of ``3 * (order + 1)``
    samples per side. Cutoffs at or above Nyquist return the input
    unchanged with ``passthrough=True``.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if len(x) <= 6 * spec.order:
        raise TooShortForFilter(f"{len(x)} samples; need more than {6 * spec.order}")
    if spec.passthrough:
        log.warning(
            "cutoff %.3g Hz >= Nyquist of %.3g Hz sampling; passing signal through unfiltered",
            spec.cutoff_hz,
            spec.sample_rate_hz,
        )
        return FilterOutput(x.copy(), True)

    b, a = butterworth_coefficients(spec)
    zi = steady_state_initial(b, a)
    if not zero_phase:
        y, _ = kernels.lfilter(b, a, x, zi * x[0])
        return FilterOutput(y, False)

    pad = 3 * (spec.order + 1)
    ext = np.concatenate((2 * x[0] - x[pad:0:-1], x, 2 * x[-1] - x[-2 : -pad - 2 : -1]))
    fwd, _ = kernels.lfilter(b, a, ext, zi * ext[0])
    rev = fwd[::-1].copy()
    bwd, _ = kernels.lfilter(b, a, rev, zi * rev[0])
    return FilterOutput(bwd[::-1][pad:-pad].copy(), False)


def preprocess_record(
    record: SignalRecord,
    cutoffs_hz: Mapping[ChannelKind, float] | None = None,
    order: int = FILTER_ORDER,
    zero_phase: bool = True,
) -> tuple[SignalRecord, list[str]]:
    """Normalize then filter every channel. Returns the new record and warnings."""
    cutoffs = dict(DEFAULT_CUTOFFS_HZ)
    if cutoffs_hz:
        cutoffs.update(cutoffs_hz)
    warnings = []
    out = {}
    for kind, samples in record.channels.items():
        try:
            norm = min_max_normalize(samples)
        except ConstantSignal as exc:
            raise ConstantSignal(f"drive {record.drive_id!r} channel {kind.value}: {exc}") from None
        spec = FilterSpec(cutoffs[kind], record.sample_rate_hz, order)
        res = butterworth_lowpass(norm, spec, zero_phase=zero_phase)
        if res.passthrough:
            warnings.append(
                f"{kind.value}: cutoff {spec.cutoff_hz:g} Hz >= Nyquist ({record.sample_rate_hz / 2:g} Hz), unfiltered"
            )
        out[kind] = res.signal
    return record.with_channels(out), warnings


@dataclass(frozen=True)
class Window:
    drive_id: str
    section_index: int
    situation: DrivingSituation
    start_s: float
    end_s: float
    sample_rate_hz: float
    samples: Mapping[ChannelKind, np.ndarray]


def window_offsets(section_length_s: float, length_s: float = WINDOW_S, hop_s: float = HOP_S) -> list[float]:
    """Start offsets of every full window inside a section."""
    if section_length_s < length_s:
        return []
    count = int(math.floor((section_length_s - length_s) / hop_s + 1e-9)) + 1
    return [k * hop_s for k in range(count)]


def slice_windows(
    record: SignalRecord,
    ann: SectionAnnotation,
    length_s: float = WINDOW_S,
    hop_s: float = HOP_S,
) -> list[Window]:
    """Cut each section into windows anchored at the section start.

    Windows never cross a section boundary. Windows past the end of a
    slightly short record are skipped with a log message.
    """
    if record.drive_id != ann.drive_id:
        raise ValueError(f"record {record.drive_id!r} paired with annotation {ann.drive_id!r}")
    rate = record.sample_rate_hz
    n_win = int(math.floor(length_s * rate + 1e-9))
    total = len(record)
    windows = []
    for idx, sec in enumerate(ann.sections):
        for off in window_offsets(sec.length_s, length_s, hop_s):
            start_s = sec.start_s + off
            i0 = int(round(start_s * rate))
            if i0 + n_win > total:
                log.info("drive %s section %d: window at %.1f s runs past record end", record.drive_id, idx, start_s)
                continue
            samples = {k: v[i0 : i0 + n_win] for k, v in record.channels.items()}
            windows.append(Window(record.drive_id, idx, sec.situation, start_s, start_s + length_s, rate, samples))
    return windows
