"""Synthetic physiological drives with known ground truth.

City sections get a faster heart rate and more frequent skin conductance
responses than Highway or Rest, by a margin far above the noise, so the
whole pipeline has a planted, learnable signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import (
    ChannelKind,
    DrivingSituation,
    Section,
    SectionAnnotation,
    SignalRecord,
    format_annotations,
    save_record,
)

R, C, H = DrivingSituation.REST, DrivingSituation.CITY, DrivingSituation.HIGHWAY
CANONICAL_PATTERN = (R, C, H, C, H, C, R)

# (heart rate bpm, mean seconds between SCRs, breathing Hz)
PROFILES = {
    R: (62.0, 40.0, 0.22),
    H: (72.0, 22.0, 0.25),
    C: (96.0, 6.0, 0.32),
}

# (amplitude, centre offset s, width s) of P, Q, R, S, T
ECG_WAVES = (
    (0.15, -0.16, 0.025),
    (-0.12, -0.03, 0.010),
    (1.00, 0.00, 0.012),
    (-0.25, 0.03, 0.010),
    (0.30, 0.28, 0.040),
)


def synthetic_ecg(beat_times_s, sample_rate_hz: float, n_samples: int) -> np.ndarray:
    """Sum of Gaussian P-QRS-T complexes with R peaks at ``beat_times_s``."""
    fs = sample_rate_hz
    x = np.zeros(n_samples)
    reach = int(0.6 * fs)
    for tb in np.asarray(beat_times_s, dtype=np.float64):
        c = int(round(tb * fs))
        lo, hi = max(0, c - reach), min(n_samples, c + reach + 1)
        if lo >= hi:
            continue
        t = np.arange(lo, hi) / fs - tb
        for amp, off, width in ECG_WAVES:
            x[lo:hi] += amp * np.exp(-0.5 * ((t - off) / width) ** 2)
    return x


def beat_times(duration_s: float, hr_of_t, rng: np.random.Generator, rsa_ms: float = 25.0,
               lf_ms: float = 20.0, jitter_ms: float = 8.0, resp_hz: float = 0.25, start_s: float = 0.5) -> np.ndarray:
    """Beat times with respiratory (HF) and 0.1 Hz (LF) modulation of the NN interval."""
    times = [start_s]
    while True:
        t = times[-1]
        nn = 60.0 / hr_of_t(t)
        nn += (rsa_ms * np.sin(2 * np.pi * resp_hz * t) + lf_ms * np.sin(2 * np.pi * 0.1 * t)) / 1000.0
        nn += rng.normal(0.0, jitter_ms / 1000.0)
        if t + nn >= duration_s:
            break
        times.append(t + nn)
    return np.asarray(times)


def _scr_train(onsets, sample_rate_hz: float, n_samples: int, amplitude: float) -> np.ndarray:
    fs = sample_rate_hz
    x = np.zeros(n_samples)
    reach = int(25 * fs)
    for t0 in onsets:
        i0 = int(round(t0 * fs))
        if i0 >= n_samples:
            continue
        t = np.arange(0, min(reach, n_samples - i0)) / fs
        x[i0 : i0 + len(t)] += amplitude * (np.exp(-t / 4.0) - np.exp(-t / 0.9)) / 0.53
    return x


@dataclass(frozen=True)
class SyntheticDrive:
    record: SignalRecord
    annotation: SectionAnnotation


def make_drive(
    drive_id: str,
    seed: int,
    section_s: float = 200.0,
    sample_rate_hz: float = 128.0,
    pattern=CANONICAL_PATTERN,
    noise: float = 0.01,
) -> SyntheticDrive:
    rng = np.random.default_rng(seed)
    fs = sample_rate_hz
    sections = tuple(Section(i * section_s, (i + 1) * section_s, s) for i, s in enumerate(pattern))
    duration = len(pattern) * section_s
    n = int(round(duration * fs))
    t = np.arange(n) / fs

    hr_shift = rng.uniform(-3, 3)
    rate_scale = rng.uniform(0.9, 1.1)

    def situation_at(time):
        return pattern[min(int(time // section_s), len(pattern) - 1)]

    beats = beat_times(duration, lambda tt: PROFILES[situation_at(tt)][0] + hr_shift, rng)
    ecg = synthetic_ecg(beats, fs, n) + rng.normal(0, noise, n)

    onsets = []
    for sec in sections:
        mean_gap = PROFILES[sec.situation][1] * rate_scale
        tt = sec.start_s + rng.uniform(0.5, mean_gap)
        while tt < sec.end_s:
            onsets.append(tt)
            tt += mean_gap * rng.uniform(0.8, 1.2)
    drift = 0.3 * np.sin(2 * np.pi * t / duration)
    hand = 2.0 + drift + _scr_train(onsets, fs, n, 1.0) + rng.normal(0, noise, n)
    foot = 1.5 + 0.5 * drift + _scr_train(onsets, fs, n, 0.6) + rng.normal(0, noise, n)

    sec_idx = np.minimum((t // section_s).astype(int), len(pattern) - 1)
    breath_hz = np.array([PROFILES[s][2] for s in pattern])[sec_idx]
    phase = 2 * np.pi * np.cumsum(breath_hz) / fs
    resp = np.sin(phase) + rng.normal(0, noise, n)

    record = SignalRecord(
        drive_id,
        fs,
        {ChannelKind.ECG: ecg, ChannelKind.HAND_GSR: hand, ChannelKind.FOOT_GSR: foot, ChannelKind.RESPIRATION: resp},
    )
    return SyntheticDrive(record, SectionAnnotation(drive_id, sections))


def make_drives(n_drives: int = 7, seed: int = 0, **kwargs) -> list[SyntheticDrive]:
    return [make_drive(f"syn{i:02d}", seed * 1000 + i, **kwargs) for i in range(n_drives)]


def write_dataset(drives, directory: str | Path) -> Path:
    """Write records, annotations and a manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    for d in drives:
        rid = d.record.drive_id
        save_record(d.record, directory / f"{rid}.csv")
        (directory / f"{rid}.ann").write_text(format_annotations(d.annotation))
        lines.append(f"{rid},{rid}.csv,{rid}.ann")
    manifest = directory / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
