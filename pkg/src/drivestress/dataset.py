"""Feature expansion, label push-back and leave-one-drive-out folds."""

from __future__ import annotations

import csv
import enum
import io
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantViolation, MalformedFile, SingleDrive, TooFewWindows
from .features import FEATURE_NAMES, FeatureVector
from .ingest import DrivingSituation, StressLabel

STAT_NAMES = ("mean", "median", "std", "min", "max", "twa")
EXPANDED_NAMES: tuple[str, ...] = tuple(f"{f}__{s}" for f in FEATURE_NAMES for s in STAT_NAMES)
N_EXPANDED = len(EXPANDED_NAMES)
WEIGHTINGS = ("linear", "uniform", "timestamps")


class BinaryLabel(enum.IntEnum):
    """Classes left after dropping samples whose upcoming section is Rest."""

    LOW = 0  # upcoming Highway
    HIGH = 1  # upcoming City

    @property
    def tag(self) -> str:
        return "low(=highway)" if self is BinaryLabel.LOW else "high(=city)"

    @classmethod
    def from_tag(cls, tag: str) -> "BinaryLabel":
        for member in cls:
            if member.tag == tag:
                return member
        raise ValueError(f"unknown label {tag!r}")


CLASS_ORDER = (BinaryLabel.LOW, BinaryLabel.HIGH)


def time_weighted_average(values, weights: str = "linear", times=None) -> float:
    """Recency-weighted mean of ``values`` (oldest first).

    ``linear`` weighs the i-th value (1-based) by i, ``uniform`` by 1 and
    ``timestamps`` by its start time measured in hops from the first one
    plus one (identical to ``linear`` for evenly spaced windows).
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("time-weighted average of nothing")
    if weights == "linear":
        w = np.arange(1, v.size + 1, dtype=np.float64)
    elif weights == "uniform":
        w = np.ones(v.size)
    elif weights == "timestamps":
        if times is None:
            raise ValueError("timestamps weighting needs window times")
        t = np.asarray(times, dtype=np.float64)
        hop = np.min(np.diff(t)) if t.size > 1 else 1.0
        w = (t - t[0]) / hop + 1.0
    else:
        raise ValueError(f"unknown weighting {weights!r}; expected one of {WEIGHTINGS}")
    return float(np.dot(w, v) / w.sum())


def expand_section(windows: Sequence[FeatureVector], n: int, weights: str = "linear") -> np.ndarray:
    """Six statistics of each base feature over the section's last ``n`` windows.

    Output is feature-major: ``f0__mean, f0__median, ..., f0__twa, f1__mean, ...``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if len(windows) < n:
        first = windows[0] if windows else None
        raise TooFewWindows(first.drive_id if first else "?", first.section_index if first else -1, len(windows), n)
    last = list(windows)[-n:]
    block = np.stack([w.values for w in last])  # n x 42
    times = [w.window_start_s for w in last]
    lo = block.min(axis=0)
    hi = block.max(axis=0)
    stats = np.empty((block.shape[1], len(STAT_NAMES)))
    stats[:, 0] = np.clip(block.mean(axis=0), lo, hi)
    stats[:, 1] = np.median(block, axis=0)
    stats[:, 2] = block.std(axis=0)
    stats[:, 3] = lo
    stats[:, 4] = hi
    stats[:, 5] = np.clip([time_weighted_average(block[:, j], weights, times) for j in range(block.shape[1])], lo, hi)
    return stats.reshape(-1)


@dataclass(frozen=True)
class ExpandedSample:
    drive_id: str
    section_index: int
    values: np.ndarray
    label: BinaryLabel

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (N_EXPANDED,):
            raise InvariantViolation(f"expanded sample has shape {v.shape}, expected ({N_EXPANDED},)")
        if not np.isfinite(v).all():
            raise InvariantViolation(f"non-finite expanded values in {self.drive_id}/{self.section_index}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def sample_id(self) -> tuple[str, int]:
        return (self.drive_id, self.section_index)


@dataclass(frozen=True)
class SectionSample:
    """One section's expanded features before labelling."""

    drive_id: str
    section_index: int
    situation: DrivingSituation
    values: np.ndarray


def shift_and_filter(sections: Sequence[SectionSample]) -> list[ExpandedSample]:
    """Label each section with the stress of the section after it.

    The last section has no successor and is dropped; so is every sample
    whose upcoming section is Rest.
    """
    out = []
    for cur, nxt in zip(sections, sections[1:]):
        upcoming = StressLabel.of(nxt.situation)
        if upcoming is StressLabel.LOW:
            continue
        label = BinaryLabel.HIGH if upcoming is StressLabel.HIGH else BinaryLabel.LOW
        out.append(ExpandedSample(cur.drive_id, cur.section_index, cur.values, label))
    return out


def group_sections(vectors: Iterable[FeatureVector]) -> dict[str, list[tuple[int, DrivingSituation, list[FeatureVector]]]]:
    """drive id -> [(section index, situation, windows in time order)], sections ascending."""
    by_drive: dict[str, dict[int, list[FeatureVector]]] = {}
    for fv in vectors:
        by_drive.setdefault(fv.drive_id, {}).setdefault(fv.section_index, []).append(fv)
    out = {}
    for drive, secs in by_drive.items():
        rows = []
        for idx in sorted(secs):
            wins = sorted(secs[idx], key=lambda w: w.window_start_s)
            rows.append((idx, wins[0].situation, wins))
        out[drive] = rows
    return out


def build_drive_samples(vectors: Sequence[FeatureVector], n: int, weights: str = "linear") -> list[ExpandedSample]:
    """Expand and label every section of one drive."""
    grouped = group_sections(vectors)
    if len(grouped) != 1:
        raise ValueError(f"expected windows from exactly one drive, got {sorted(grouped)}")
    (drive, rows), = grouped.items()
    expected = list(range(len(rows)))
    present = [idx for idx, _, _ in rows]
    if present != expected:
        missing = sorted(set(range(max(present) + 1)) - set(present))
        raise TooFewWindows(drive, missing[0], 0, n)
    sections = [
        SectionSample(drive, idx, situation, expand_section(wins, n, weights)) for idx, situation, wins in rows
    ]
    return shift_and_filter(sections)


def build_samples(vectors: Iterable[FeatureVector], n: int, weights: str = "linear") -> list[ExpandedSample]:
    vectors = list(vectors)
    grouped = group_sections(vectors)
    out = []
    for drive in sorted(grouped):
        out.extend(build_drive_samples([v for v in vectors if v.drive_id == drive], n, weights))
    return out


@dataclass(frozen=True)
class LosoFold:
    test_drive_id: str
    train: tuple[ExpandedSample, ...]
    test: tuple[ExpandedSample, ...]


def assemble_loso(samples: Sequence[ExpandedSample]) -> list[LosoFold]:
    """One fold per drive, ordered by drive id."""
    drives = sorted({s.drive_id for s in samples})
    if len(drives) < 2:
        raise SingleDrive(f"leave-one-drive-out needs at least two drives, got {drives}")
    return [
        LosoFold(
            d,
            tuple(s for s in samples if s.drive_id != d),
            tuple(s for s in samples if s.drive_id == d),
        )
        for d in drives
    ]


def to_arrays(samples: Sequence[ExpandedSample]) -> tuple[np.ndarray, np.ndarray]:
    if not samples:
        return np.empty((0, N_EXPANDED)), np.empty(0, dtype=np.intp)
    X = np.stack([s.values for s in samples])
    y = np.array([int(s.label) for s in samples], dtype=np.intp)
    return X, y


def format_expanded_table(samples: Iterable[ExpandedSample]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(("drive_id", "section_index", "label") + EXPANDED_NAMES)
    for s in samples:
        wr.writerow([s.drive_id, s.section_index, s.label.tag] + [repr(v) for v in s.values.tolist()])
    return buf.getvalue()


def parse_expanded_table(text: str, source: str = "<string>") -> list[ExpandedSample]:
    rows = list(csv.reader(io.StringIO(text)))
    header = ("drive_id", "section_index", "label") + EXPANDED_NAMES
    if not rows or tuple(rows[0]) != header:
        raise MalformedFile(f"{source}: header does not match the expanded table layout")
    out = []
    for lineno, row in enumerate(itertools.islice(rows, 1, None), 2):
        if not row:
            continue
        try:
            out.append(
                ExpandedSample(row[0], int(row[1]), np.array([float(v) for v in row[3:]]), BinaryLabel.from_tag(row[2]))
            )
        except (ValueError, InvariantViolation) as exc:
            raise MalformedFile(f"{source}:{lineno}: {exc}") from None
    return out
