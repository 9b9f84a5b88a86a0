"""Exception hierarchy.

Everything raised on bad input derives from :class:`DataError` (CLI exit code 2);
:class:`InvariantViolation` marks an internal bug (exit code 3).
"""

from __future__ import annotations


class DriveStressError(Exception):
    """Base class for all package errors."""


class DataError(DriveStressError):
    """Input data cannot be processed."""


class InvariantViolation(DriveStressError):
    """An internal consistency check failed."""


# ingest
class IngestError(DataError):
    pass


class MalformedFile(IngestError):
    pass


class MissingChannel(IngestError):
    def __init__(self, kind, path=None):
        self.kind = kind
        where = f" in {path}" if path else ""
        super().__init__(f"missing channel {kind.value!r}{where}")


class NonFiniteSample(IngestError):
    def __init__(self, row: int, column: str):
        self.row = row
        self.column = column
        super().__init__(f"non-finite sample in column {column!r} at data row {row}")


class TooShort(IngestError):
    pass


class BadTimeAxis(IngestError):
    pass


class NonContiguous(IngestError):
    pass


class BadAlternation(IngestError):
    pass


class SectionTooShort(IngestError):
    pass


class UnmatchedDrive(IngestError):
    def __init__(self, drive_id: str, detail: str):
        self.drive_id = drive_id
        super().__init__(f"drive {drive_id!r}: {detail}")


class DurationMismatch(IngestError):
    pass


# preprocess
class ConstantSignal(DataError):
    pass


class TooShortForFilter(DataError):
    pass


# features
class InsufficientBeats(DataError):
    pass


class DegenerateSpectrum(DataError):
    pass


class EmptyBand(DataError):
    pass


# dataset
class TooFewWindows(DataError):
    def __init__(self, drive_id: str, section_index: int, have: int, need: int):
        self.drive_id = drive_id
        self.section_index = section_index
        super().__init__(
            f"drive {drive_id!r} section {section_index}: {have} windows, need {need}"
        )


class SingleDrive(DataError):
    pass


# forest / eval
class EmptyNode(DataError):
    pass


class SingleClassTrainingSet(DataError):
    pass


class ArityMismatch(DataError):
    pass


class EmptyMatrix(DataError):
    pass
