import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drivestress.dataset import (
    EXPANDED_NAMES,
    STAT_NAMES,
    BinaryLabel,
    SectionSample,
    assemble_loso,
    build_drive_samples,
    build_samples,
    expand_section,
    format_expanded_table,
    parse_expanded_table,
    shift_and_filter,
    time_weighted_average,
)
from drivestress.errors import SingleDrive, TooFewWindows
from drivestress.features import FEATURE_NAMES, FeatureVector
from drivestress.ingest import DrivingSituation
from drivestress.synthetic import CANONICAL_PATTERN

R, C, H = DrivingSituation.REST, DrivingSituation.CITY, DrivingSituation.HIGHWAY


def _fv(values, drive="d", section=0, situation=R, start=0.0):
    v = np.broadcast_to(np.asarray(values, dtype=float), (42,))
    return FeatureVector(drive, section, situation, start, v)


def _section_windows(column, **kw):
    return [_fv(v, start=50.0 * i, **kw) for i, v in enumerate(column)]


def _drive(drive, pattern, windows_per_section=5, rng=None):
    rng = rng or np.random.default_rng(0)
    out = []
    for idx, sit in enumerate(pattern):
        for k in range(windows_per_section):
            out.append(FeatureVector(drive, idx, sit, 200.0 * idx + 50.0 * k, rng.normal(size=42)))
    return out


class TestTwa:
    def test_examples(self):
        assert time_weighted_average([0.7, 0.7, 0.7]) == pytest.approx(0.7)
        assert time_weighted_average([1, 2, 3]) == pytest.approx(14 / 6)
        assert time_weighted_average([5]) == 5

    def test_weightings(self):
        assert time_weighted_average([1, 2, 3], "uniform") == pytest.approx(2.0)
        assert time_weighted_average([1, 2, 3], "timestamps", times=[100, 150, 200]) == pytest.approx(14 / 6)
        # a dropped window leaves a gap: weights 1, 2, 4 in hops of 50 s
        assert time_weighted_average([1, 2, 3], "timestamps", times=[100, 150, 250]) == pytest.approx(17 / 7)
        with pytest.raises(ValueError):
            time_weighted_average([1], "cubic")


class TestExpand:
    def test_two_values(self):
        out = expand_section(_section_windows([0.2, 0.4]), 2).reshape(42, 6)
        assert np.allclose(out[0], [0.3, 0.3, 0.1, 0.2, 0.4, 1 / 3])
        assert np.allclose(out, out[0])

    def test_n_one(self):
        out = expand_section(_section_windows([0.1, 0.9]), 1).reshape(42, 6)
        assert out[0].tolist() == [0.9, 0.9, 0.0, 0.9, 0.9, 0.9]

    def test_constant(self):
        out = expand_section(_section_windows([0.37] * 7), 5).reshape(42, 6)
        assert out[0].tolist() == [0.37, 0.37, 0.0, 0.37, 0.37, 0.37]

    def test_uses_last_n(self):
        out = expand_section(_section_windows([100.0, 1.0, 2.0, 3.0]), 3).reshape(42, 6)
        assert out[0][3] == 1.0 and out[0][4] == 3.0

    def test_too_few(self):
        with pytest.raises(TooFewWindows) as exc:
            expand_section(_section_windows([1.0, 2.0], drive="x", section=3), 3)
        assert (exc.value.drive_id, exc.value.section_index) == ("x", 3)

    def test_names(self):
        assert len(EXPANDED_NAMES) == 252
        assert EXPANDED_NAMES[:6] == tuple(f"{FEATURE_NAMES[0]}__{s}" for s in STAT_NAMES)
        assert EXPANDED_NAMES[-1] == "hf_norm__twa"

    @settings(max_examples=150, deadline=None)
    @given(
        st.integers(1, 6),
        st.lists(st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False), min_size=6, max_size=6),
        st.sampled_from(["linear", "uniform", "timestamps"]),
    )
    def test_sandwich(self, n, column, weights):
        wins = [FeatureVector("d", 0, R, 50.0 * i, np.full(42, v) * np.linspace(-1, 1, 42)) for i, v in
                enumerate(column)]
        out = expand_section(wins, n, weights).reshape(42, 6)
        mean, median, std, lo, hi, twa = out.T
        assert np.all(lo <= mean) and np.all(mean <= hi)
        assert np.all(lo <= median) and np.all(median <= hi)
        assert np.all(lo <= twa) and np.all(twa <= hi)
        assert np.all(std >= 0)
        assert np.isfinite(out).all()


def _sections(pattern, drive="d"):
    return [SectionSample(drive, i, s, np.full(252, float(i))) for i, s in enumerate(pattern)]


class TestShift:
    def test_five_sections(self):
        out = shift_and_filter(_sections([R, C, H, C, R]))
        assert [s.section_index for s in out] == [0, 1, 2]
        assert [s.label for s in out] == [BinaryLabel.HIGH, BinaryLabel.LOW, BinaryLabel.HIGH]

    def test_canonical(self):
        out = shift_and_filter(_sections(CANONICAL_PATTERN))
        assert [s.label for s in out] == [BinaryLabel.HIGH, BinaryLabel.LOW, BinaryLabel.HIGH, BinaryLabel.LOW,
                                          BinaryLabel.HIGH]
        assert sum(s.label is BinaryLabel.HIGH for s in out) == 3
        assert sum(s.label is BinaryLabel.LOW for s in out) == 2

    @given(st.lists(st.sampled_from([C, H]), min_size=1, max_size=10))
    def test_length_and_labels(self, interior):
        pattern = [R, *interior, R]
        out = shift_and_filter(_sections(pattern))
        # one per section except the last, minus those facing Rest (only the one before the final Rest)
        assert len(out) == len(pattern) - 2
        for s in out:
            nxt = pattern[s.section_index + 1]
            assert s.label is (BinaryLabel.HIGH if nxt is C else BinaryLabel.LOW)

    def test_tags(self):
        assert BinaryLabel.LOW.tag == "low(=highway)" and BinaryLabel.HIGH.tag == "high(=city)"
        assert BinaryLabel.from_tag("high(=city)") is BinaryLabel.HIGH


class TestBuild:
    def test_canonical_drive(self):
        samples = build_drive_samples(_drive("d", CANONICAL_PATTERN), 3)
        assert len(samples) == 5
        assert all(s.values.shape == (252,) for s in samples)

    def test_section_short_of_windows(self):
        vectors = [v for v in _drive("d", CANONICAL_PATTERN) if not (v.section_index == 2 and v.window_start_s > 460)]
        with pytest.raises(TooFewWindows) as exc:
            build_drive_samples(vectors, 5)
        assert (exc.value.drive_id, exc.value.section_index) == ("d", 2)

    def test_missing_section(self):
        vectors = [v for v in _drive("d", CANONICAL_PATTERN) if v.section_index != 4]
        with pytest.raises(TooFewWindows) as exc:
            build_drive_samples(vectors, 2)
        assert exc.value.section_index == 4

    def test_order_independent(self):
        vectors = _drive("a", CANONICAL_PATTERN) + _drive("b", CANONICAL_PATTERN)
        a = build_samples(vectors, 3)
        b = build_samples(list(reversed(vectors)), 3)
        assert [s.sample_id for s in a] == [s.sample_id for s in b]
        assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))

    def test_table_roundtrip(self):
        samples = build_samples(_drive("a", CANONICAL_PATTERN) + _drive("b", CANONICAL_PATTERN), 4)
        text = format_expanded_table(samples)
        assert text.splitlines()[0] == ",".join(("drive_id", "section_index", "label") + EXPANDED_NAMES)
        back = parse_expanded_table(text)
        assert [(s.sample_id, s.label) for s in back] == [(s.sample_id, s.label) for s in samples]
        assert all(np.array_equal(x.values, y.values) for x, y in zip(back, samples))


class TestLoso:
    def test_seven(self):
        samples = build_samples(sum((_drive(f"d{i}", CANONICAL_PATTERN) for i in range(7)), []), 2)
        folds = assemble_loso(samples)
        assert [f.test_drive_id for f in folds] == [f"d{i}" for i in range(7)]

    def test_two(self):
        samples = build_samples(_drive("a", CANONICAL_PATTERN) + _drive("b", CANONICAL_PATTERN), 2)
        assert len(assemble_loso(samples)) == 2

    def test_single(self):
        with pytest.raises(SingleDrive):
            assemble_loso(build_samples(_drive("a", CANONICAL_PATTERN), 2))

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.text("abcdefgh0123456789_", min_size=1, max_size=6), min_size=2, max_size=9, unique=True),
           st.data())
    def test_disjoint_and_covering(self, drives, data):
        samples = []
        for d in drives:
            for idx in range(data.draw(st.integers(1, 4))):
                label = data.draw(st.sampled_from(list(BinaryLabel)))
                samples.append(SectionSample(d, idx, R, np.zeros(252)))
                samples[-1] = shift_and_filter([samples[-1], SectionSample(d, idx + 1, C if label else H, None)])[0]
        folds = assemble_loso(samples)
        assert sorted(f.test_drive_id for f in folds) == sorted(drives)
        for f in folds:
            train_ids = {s.drive_id for s in f.train}
            assert f.test_drive_id not in train_ids
            assert {s.drive_id for s in f.test} == {f.test_drive_id}
            ids = sorted([s.sample_id for s in f.train] + [s.sample_id for s in f.test])
            assert ids == sorted(s.sample_id for s in samples)
