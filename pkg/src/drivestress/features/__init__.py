"""Per-window feature extraction: 7 per GSR site, 6 respiration, 22 ECG."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import DegenerateSpectrum, InsufficientBeats, InvariantViolation, MalformedFile
from ..ingest import ChannelKind, DrivingSituation
from ..preprocess import Window
from .ecg import NnSeries, detect_r_peaks
from .gsr import MIN_PROMINENCE, MIN_SEPARATION_S, GsrPeak, detect_scr_peaks, gsr_features
from .hrv import FREQ_FEATURES, TACHOGRAM_RATE_HZ, TIME_FEATURES, hrv_freq_features, hrv_time_features
from .spectral import band_power, periodogram, resp_features

GSR_FEATURES = ("mean", "var", "peak_count", "peak_height_sum", "peak_duration_sum", "peak_prom_mean", "peak_prom_var")
RESP_FEATURES = ("resp_mean", "resp_var", "resp_bp_00_01", "resp_bp_01_02", "resp_bp_02_03", "resp_bp_03_04")
ECG_FEATURES = TIME_FEATURES + FREQ_FEATURES

FEATURE_NAMES: tuple[str, ...] = (
    tuple(f"hand_{n}" for n in GSR_FEATURES)
    + tuple(f"foot_{n}" for n in GSR_FEATURES)
    + RESP_FEATURES
    + ECG_FEATURES
)
N_FEATURES = len(FEATURE_NAMES)
ECG_SLICE = slice(N_FEATURES - len(ECG_FEATURES), N_FEATURES)

FEATURE_TABLE_HEADER = ("drive_id", "section_index", "situation", "window_start_s") + FEATURE_NAMES


@dataclass(frozen=True)
class FeatureParams:
    gsr_min_prominence: float = MIN_PROMINENCE
    gsr_min_separation_s: float = MIN_SEPARATION_S
    tachogram_rate_hz: float = TACHOGRAM_RATE_HZ


@dataclass(frozen=True)
class FeatureVector:
    drive_id: str
    section_index: int
    situation: DrivingSituation
    window_start_s: float
    values: np.ndarray
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (N_FEATURES,):
            raise InvariantViolation(f"feature vector has shape {v.shape}, expected ({N_FEATURES},)")
        if not np.isfinite(v).all():
            bad = [FEATURE_NAMES[i] for i in np.flatnonzero(~np.isfinite(v))]
            raise InvariantViolation(f"non-finite features: {bad}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values.tolist()))


def ecg_features(ecg_window, sample_rate_hz: float, params: FeatureParams = FeatureParams()) -> tuple[np.ndarray, tuple[str, ...]]:
    nn = detect_r_peaks(ecg_window, sample_rate_hz)
    time = hrv_time_features(nn)
    freq = hrv_freq_features(nn, params.tachogram_rate_hz)
    flags = ("hf_zero",) if freq[3] == 0 else ()
    return np.concatenate((time, freq)), flags


def extract_window(
    window: Window,
    previous: FeatureVector | None = None,
    params: FeatureParams = FeatureParams(),
) -> FeatureVector:
    """All 42 features of one window.

    When the ECG yields too few beats (or no LF/HF power), the ECG features
    are copied from ``previous``; without a previous window the error
    propagates and the caller drops the window.
    """
    fs = window.sample_rate_hz
    peak_kw = dict(min_prominence=params.gsr_min_prominence, min_separation_s=params.gsr_min_separation_s)
    parts = [
        gsr_features(window.samples[ChannelKind.HAND_GSR], fs, **peak_kw),
        gsr_features(window.samples[ChannelKind.FOOT_GSR], fs, **peak_kw),
        resp_features(window.samples[ChannelKind.RESPIRATION], fs),
    ]
    try:
        ecg, flags = ecg_features(window.samples[ChannelKind.ECG], fs, params)
    except (InsufficientBeats, DegenerateSpectrum) as exc:
        if previous is None or previous.section_index != window.section_index:
            raise
        ecg = previous.values[ECG_SLICE]
        flags = ("ecg_imputed", f"ecg_error:{type(exc).__name__}")
    parts.append(ecg)
    return FeatureVector(
        window.drive_id, window.section_index, window.situation, window.start_s, np.concatenate(parts), flags
    )


@dataclass
class SectionLog:
    section_index: int
    situation: str
    windows: int = 0
    kept: int = 0
    imputed: list[float] = field(default_factory=list)
    dropped: list[float] = field(default_factory=list)


def extract_windows(
    windows: Sequence[Window], params: FeatureParams = FeatureParams()
) -> tuple[list[FeatureVector], list[SectionLog]]:
    """Extract every window in order, applying the copy-forward rule per section."""
    out: list[FeatureVector] = []
    logs: dict[tuple[str, int], SectionLog] = {}
    previous: FeatureVector | None = None
    for w in windows:
        key = (w.drive_id, w.section_index)
        entry = logs.setdefault(key, SectionLog(w.section_index, w.situation.value))
        entry.windows += 1
        if previous is not None and (previous.drive_id, previous.section_index) != key:
            previous = None
        try:
            fv = extract_window(w, previous, params)
        except (InsufficientBeats, DegenerateSpectrum):
            entry.dropped.append(w.start_s)
            continue
        if "ecg_imputed" in fv.flags:
            entry.imputed.append(w.start_s)
        entry.kept += 1
        out.append(fv)
        previous = fv
    return out, list(logs.values())


# --- feature tables ------------------------------------------------------------


def format_feature_table(vectors: Iterable[FeatureVector]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(FEATURE_TABLE_HEADER)
    for fv in vectors:
        wr.writerow(
            [fv.drive_id, fv.section_index, fv.situation.value, repr(float(fv.window_start_s))]
            + [repr(v) for v in fv.values.tolist()]
        )
    return buf.getvalue()


def parse_feature_table(text: str, source: str = "<string>") -> list[FeatureVector]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != FEATURE_TABLE_HEADER:
        raise MalformedFile(f"{source}: header does not match the 42-feature table layout")
    out = []
    for lineno, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != len(FEATURE_TABLE_HEADER):
            raise MalformedFile(f"{source}:{lineno}: {len(row)} fields")
        try:
            out.append(
                FeatureVector(
                    row[0], int(row[1]), DrivingSituation(row[2]), float(row[3]), np.array([float(v) for v in row[4:]])
                )
            )
        except (ValueError, InvariantViolation) as exc:
            raise MalformedFile(f"{source}:{lineno}: {exc}") from None
    return out


__all__ = [
    "ECG_FEATURES", "FEATURE_NAMES", "FeatureParams", "FeatureVector", "GsrPeak", "N_FEATURES", "NnSeries",
    "band_power", "detect_r_peaks", "detect_scr_peaks", "extract_window", "extract_windows",
    "format_feature_table", "gsr_features", "hrv_freq_features", "hrv_time_features",
    "parse_feature_table", "periodogram", "resp_features",
]
