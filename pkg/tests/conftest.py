from __future__ import annotations

import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from drivestress import synthetic  # noqa: E402
from drivestress.features import extract_windows  # noqa: E402
from drivestress.preprocess import preprocess_record, slice_windows  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_record_csv(path: Path, n_rows: int, rate: float = 15.5, columns=("ecg", "hand_gsr", "foot_gsr", "resp"),
                     extra=(), seed: int = 0):
    rng = np.random.default_rng(seed)
    header = ["time_s", *columns, *extra]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n_rows):
            vals = [repr(i / rate)] + [repr(float(v)) for v in rng.normal(size=len(columns) + len(extra))]
            fh.write(",".join(vals) + "\n")
    return path


@pytest.fixture
def record_csv(tmp_path):
    def make(n_rows=3100, **kw):
        return write_record_csv(tmp_path / "rec.csv", n_rows, **kw)

    return make


@pytest.fixture(scope="session")
def synthetic_vectors():
    """Feature vectors of 7 planted-separation drives with 300 s sections."""
    vectors = []
    for d in synthetic.make_drives(7, seed=0, section_s=300.0):
        rec, _ = preprocess_record(d.record)
        v, _ = extract_windows(slice_windows(rec, d.annotation))
        vectors += v
    return vectors


@pytest.fixture(scope="session")
def synthetic_dataset(tmp_path_factory):
    """Small 7-drive dataset on disk (64 Hz, 200 s sections); returns the manifest."""
    root = tmp_path_factory.mktemp("syn")
    return synthetic.write_dataset(synthetic.make_drives(7, seed=3, section_s=200.0, sample_rate_hz=64.0), root)


@pytest.fixture
def dataset_manifest():
    path = os.environ.get("DRIVESTRESS_MANIFEST")
    if not path:
        pytest.skip("set DRIVESTRESS_MANIFEST to a converted drivedb manifest to run dataset checks")
    return Path(path)
