"""Loading and validating drive records, section annotations and manifests.

Record CSV layout::

    time_s,ecg,hand_gsr,foot_gsr,resp[,ignored extra columns...]

Annotation layout::

    drive drive05
    0 900 Rest
    900 1800 City
    ...
"""

from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    BadAlternation,
    BadTimeAxis,
    DurationMismatch,
    MalformedFile,
    MissingChannel,
    NonContiguous,
    NonFiniteSample,
    SectionTooShort,
    TooShort,
    UnmatchedDrive,
)

MIN_RECORD_S = 200.0
MIN_SECTION_S = 100.0
TIME_TOLERANCE_S = 1e-6
BOUNDARY_TOLERANCE_S = 1e-9


class ChannelKind(enum.Enum):
    ECG = "ecg"
    HAND_GSR = "hand_gsr"
    FOOT_GSR = "foot_gsr"
    RESPIRATION = "resp"


CHANNEL_ORDER = (ChannelKind.ECG, ChannelKind.HAND_GSR, ChannelKind.FOOT_GSR, ChannelKind.RESPIRATION)


class DrivingSituation(enum.Enum):
    REST = "Rest"
    CITY = "City"
    HIGHWAY = "Highway"


class StressLabel(enum.IntEnum):
    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @classmethod
    def of(cls, situation: DrivingSituation) -> "StressLabel":
        return _STRESS_OF[situation]


_STRESS_OF = {
    DrivingSituation.REST: StressLabel.LOW,
    DrivingSituation.HIGHWAY: StressLabel.MEDIUM,
    DrivingSituation.CITY: StressLabel.HIGH,
}


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SignalRecord:
    drive_id: str
    sample_rate_hz: float
    channels: Mapping[ChannelKind, np.ndarray]

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        missing = [k for k in CHANNEL_ORDER if k not in self.channels]
        if missing:
            raise MissingChannel(missing[0])
        chans = {k: _readonly(self.channels[k]) for k in CHANNEL_ORDER}
        lengths = {len(v) for v in chans.values()}
        if len(lengths) != 1:
            raise MalformedFile(f"drive {self.drive_id!r}: channel lengths differ {sorted(lengths)}")
        object.__setattr__(self, "channels", chans)

    def __len__(self) -> int:
        return len(self.channels[ChannelKind.ECG])

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def with_channels(self, channels: Mapping[ChannelKind, np.ndarray]) -> "SignalRecord":
        return SignalRecord(self.drive_id, self.sample_rate_hz, dict(channels))


@dataclass(frozen=True)
class Section:
    start_s: float
    end_s: float
    situation: DrivingSituation

    @property
    def length_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class SectionAnnotation:
    drive_id: str
    sections: tuple[Section, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "sections", tuple(self.sections))
        validate_sections(self.sections, self.drive_id)

    @property
    def end_s(self) -> float:
        return self.sections[-1].end_s


def validate_sections(sections: Sequence[Section], drive_id: str = "?", min_section_s: float = MIN_SECTION_S):
    if not sections:
        raise BadAlternation(f"drive {drive_id!r}: no sections")
    if abs(sections[0].start_s) > BOUNDARY_TOLERANCE_S:
        raise NonContiguous(f"drive {drive_id!r}: first section starts at {sections[0].start_s}, not 0")
    for i, (prev, nxt) in enumerate(zip(sections, sections[1:])):
        if abs(prev.end_s - nxt.start_s) > BOUNDARY_TOLERANCE_S:
            raise NonContiguous(
                f"drive {drive_id!r}: section {i} ends at {prev.end_s}, section {i + 1} starts at {nxt.start_s}"
            )
    for i, s in enumerate(sections):
        if s.length_s < min_section_s:
            raise SectionTooShort(
                f"drive {drive_id!r}: section {i} ({s.situation.value}) lasts {s.length_s:g} s < {min_section_s:g} s"
            )
    kinds = [s.situation for s in sections]
    interior = kinds[1:-1]
    ok = (
        len(kinds) >= 3
        and kinds[0] is DrivingSituation.REST
        and kinds[-1] is DrivingSituation.REST
        and all(k is not DrivingSituation.REST for k in interior)
        and all(a is not b for a, b in zip(interior, interior[1:]))
    )
    if not ok:
        pattern = ", ".join(k.value for k in kinds)
        raise BadAlternation(f"drive {drive_id!r}: section pattern [{pattern}] is not Rest, alternating City/Highway, Rest")


# --- records -----------------------------------------------------------------


def _read_header(path: Path) -> list[str]:
    with open(path, newline="") as fh:
        try:
            header = next(csv.reader(fh))
        except StopIteration:
            raise MalformedFile(f"{path}: empty file") from None
    return [h.strip() for h in header]


def infer_sample_rate(path: str | os.PathLike) -> float:
    """Sample rate implied by the ``time_s`` column (median step)."""
    path = Path(path)
    header = _read_header(path)
    if "time_s" not in header:
        raise MalformedFile(f"{path}: no time_s column")
    t = np.loadtxt(path, delimiter=",", skiprows=1, usecols=[header.index("time_s")], ndmin=1)
    if len(t) < 2:
        raise TooShort(f"{path}: fewer than two rows")
    return float(1.0 / np.median(np.diff(t)))


def load_record(path: str | os.PathLike, sample_rate_hz: float, drive_id: str | None = None) -> SignalRecord:
    """Read a record CSV into a validated :class:`SignalRecord`.

    Columns other than the time axis and the four channels are dropped.
    """
    path = Path(path)
    if not sample_rate_hz > 0:
        raise ValueError("sample_rate_hz must be positive")
    header = _read_header(path)
    if "time_s" not in header:
        raise MalformedFile(f"{path}: header lacks time_s")
    for kind in CHANNEL_ORDER:
        if kind.value not in header:
            raise MissingChannel(kind, path)
    names = ["time_s"] + [k.value for k in CHANNEL_ORDER]
    cols = [header.index(n) for n in names]
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, usecols=cols, ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise MalformedFile(f"{path}: {exc}") from None

    finite = np.isfinite(data)
    if not finite.all():
        row, col = np.argwhere(~finite)[0]
        raise NonFiniteSample(int(row), names[col])

    n_rows = data.shape[0]
    if n_rows < MIN_RECORD_S * sample_rate_hz - 1e-9:
        raise TooShort(
            f"{path}: {n_rows} rows = {n_rows / sample_rate_hz:g} s at {sample_rate_hz:g} Hz, need {MIN_RECORD_S:g} s"
        )
    steps = np.diff(data[:, 0])
    bad = np.flatnonzero(np.abs(steps - 1.0 / sample_rate_hz) > TIME_TOLERANCE_S)
    if bad.size:
        i = int(bad[0])
        raise BadTimeAxis(
            f"{path}: time step {steps[i]!r} s between rows {i} and {i + 1}, expected {1.0 / sample_rate_hz!r}"
        )

    channels = {kind: data[:, j + 1] for j, kind in enumerate(CHANNEL_ORDER)}
    return SignalRecord(drive_id or path.stem, float(sample_rate_hz), channels)


def save_record(record: SignalRecord, path: str | os.PathLike) -> None:
    """Write ``record`` in the CSV layout accepted by :func:`load_record`.

    Values are written with ``repr`` so a reload is bit-exact.
    """
    n = len(record)
    t = np.arange(n) / record.sample_rate_hz
    cols = [t] + [record.channels[k] for k in CHANNEL_ORDER]
    with open(path, "w", newline="") as fh:
        fh.write("time_s," + ",".join(k.value for k in CHANNEL_ORDER) + "\n")
        for row in zip(*(c.tolist() for c in cols)):
            fh.write(",".join(repr(v) for v in row) + "\n")


# --- annotations ---------------------------------------------------------------


def parse_annotations(text: str, source: str = "<string>") -> SectionAnnotation:
    drive_id = None
    sections = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if drive_id is None:
            if len(parts) != 2 or parts[0] != "drive":
                raise MalformedFile(f"{source}:{lineno}: expected 'drive <drive_id>'")
            drive_id = parts[1]
            continue
        if len(parts) != 3:
            raise MalformedFile(f"{source}:{lineno}: expected '<start_s> <end_s> <Rest|City|Highway>'")
        try:
            start, end = float(parts[0]), float(parts[1])
            situation = DrivingSituation(parts[2])
        except ValueError as exc:
            raise MalformedFile(f"{source}:{lineno}: {exc}") from None
        if not (math.isfinite(start) and math.isfinite(end)) or end <= start:
            raise MalformedFile(f"{source}:{lineno}: bad interval {start}..{end}")
        sections.append(Section(start, end, situation))
    if drive_id is None:
        raise MalformedFile(f"{source}: no 'drive' line")
    return SectionAnnotation(drive_id, tuple(sections))


def load_annotations(path: str | os.PathLike) -> SectionAnnotation:
    path = Path(path)
    return parse_annotations(path.read_text(), str(path))


def format_annotations(ann: SectionAnnotation) -> str:
    lines = [f"drive {ann.drive_id}"]
    lines += [f"{s.start_s!r} {s.end_s!r} {s.situation.value}" for s in ann.sections]
    return "\n".join(lines) + "\n"


# --- drive sets ----------------------------------------------------------------


def validate_drive_set(
    records: Sequence[SignalRecord],
    annotations: Sequence[SectionAnnotation],
    max_mismatch_s: float = 100.0,
) -> list[tuple[SignalRecord, SectionAnnotation]]:
    """Pair records with annotations by drive id and reject inconsistent drives."""
    by_id: dict[str, SectionAnnotation] = {}
    for ann in annotations:
        if ann.drive_id in by_id:
            raise UnmatchedDrive(ann.drive_id, "duplicate annotation")
        by_id[ann.drive_id] = ann
    seen = set()
    pairs = []
    for rec in records:
        if rec.drive_id in seen:
            raise UnmatchedDrive(rec.drive_id, "duplicate record")
        seen.add(rec.drive_id)
        ann = by_id.get(rec.drive_id)
        if ann is None:
            raise UnmatchedDrive(rec.drive_id, "record has no annotation")
        gap = abs(rec.duration_s - ann.end_s)
        if gap > max_mismatch_s:
            raise DurationMismatch(
                f"drive {rec.drive_id!r}: record covers {rec.duration_s:g} s but annotation ends at {ann.end_s:g} s"
            )
        pairs.append((rec, ann))
    orphans = sorted(set(by_id) - seen)
    if orphans:
        raise UnmatchedDrive(orphans[0], "annotation has no record")
    return pairs


@dataclass(frozen=True)
class ManifestEntry:
    drive_id: str
    record_path: Path
    annotation_path: Path


def load_manifest(path: str | os.PathLike) -> list[ManifestEntry]:
    """Parse ``<drive_id>,<record_csv_path>,<annotation_path>`` lines.

    Relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    base = path.parent
    entries = []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3 or not all(parts):
            raise MalformedFile(f"{path}:{lineno}: expected '<drive_id>,<record_csv>,<annotation>'")
        entries.append(ManifestEntry(parts[0], base / parts[1], base / parts[2]))
    if not entries:
        raise MalformedFile(f"{path}: no drives listed")
    ids = [e.drive_id for e in entries]
    dup = {i for i in ids if ids.count(i) > 1}
    if dup:
        raise UnmatchedDrive(sorted(dup)[0], "listed twice in manifest")
    return entries
