"""Built-in checks that need no dataset.

Each suite compares the implementation with an independent oracle
(closed-form values, exact rational arithmetic, or exhaustive search).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

import numpy as np

from . import forest
from .errors import DriveStressError
from .features import extract_windows, hrv_time_features
from .features.spectral import band_power, periodogram
from .preprocess import FilterSpec, butterworth_lowpass, preprocess_record, slice_windows

Suite = Callable[[], str]


def _check(cond: bool, msg: str):
    if not cond:
        raise AssertionError(msg)


def suite_filter_dc() -> str:
    y = butterworth_lowpass(np.full(5000, 0.7), FilterSpec(1.0, 15.5)).signal
    err = float(np.max(np.abs(y - 0.7)))
    _check(err < 1e-9, f"DC error {err:.3g}")
    return f"max DC error {err:.2e}"


def suite_filter_cutoff_tone() -> str:
    fs, fc = 100.0, 5.0
    t = np.arange(int(1000 * fs)) / fs
    y = butterworth_lowpass(np.sin(2 * np.pi * fc * t), FilterSpec(fc, fs)).signal
    mid = y[len(y) // 4 : 3 * len(y) // 4]
    amp = float(np.sqrt(2 * np.mean(mid**2)))
    _check(abs(amp - 0.5) <= 0.02, f"amplitude {amp:.4f}")
    return f"zero-phase amplitude at cutoff {amp:.4f}"


def suite_parseval() -> str:
    rng = np.random.default_rng(1)
    worst = 0.0
    for n in (1550, 1551, 400):
        x = rng.normal(size=n)
        f, p = periodogram(x, 15.5)
        rel = abs(p.sum() * (f[1] - f[0]) - x.var()) / x.var()
        worst = max(worst, rel)
    _check(worst < 1e-6, f"relative error {worst:.3g}")
    return f"worst relative error {worst:.2e}"


def suite_tone_band() -> str:
    fs = 15.5
    t = np.arange(1550) / fs
    f, p = periodogram(np.sin(2 * np.pi * 0.25 * t), fs)
    bp = band_power(f, p, 0.2, 0.3)
    _check(abs(bp - 0.5) <= 1e-3, f"band power {bp}")
    return f"0.25 Hz tone in 0.2-0.3 Hz band: {bp:.6f}"


def _hrv_oracle(nn):
    nn = [float(v) for v in nn]
    n = len(nn)
    mean = sum(nn) / n
    d = [nn[i + 1] - nn[i] for i in range(n - 1)]
    dm = sum(d) / len(d)
    hr = [60000.0 / v for v in nn]
    hm = sum(hr) / n
    s = sorted(nn)
    med = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
    sdnn = (sum((v - mean) ** 2 for v in nn) / n) ** 0.5
    rmssd = (sum(v * v for v in d) / len(d)) ** 0.5
    nn50 = sum(1 for v in d if abs(v) > 50)
    nn20 = sum(1 for v in d if abs(v) > 20)
    return [mean, sdnn, (sum((v - dm) ** 2 for v in d) / len(d)) ** 0.5, rmssd, med, nn50, 100 * nn50 / len(d),
            nn20, 100 * nn20 / len(d), rmssd / mean, sdnn / mean, hm, max(hr), min(hr),
            (sum((v - hm) ** 2 for v in hr) / n) ** 0.5]


def suite_hrv_time() -> str:
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(1000):
        nn = rng.uniform(400, 1400, size=int(rng.integers(2, 51)))
        got = hrv_time_features(nn)
        want = np.array(_hrv_oracle(nn))
        worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want)))))
    _check(worst <= 1e-9, f"deviation {worst:.3g}")
    return f"1000 series, worst deviation {worst:.2e}"


def _gini_exact(counts):
    total = sum(counts)
    return float(1 - sum(Fraction(c, total) ** 2 for c in counts))


def suite_gini() -> str:
    for counts, want in (([10, 0], 0.0), ([5, 5], 0.5), ([3, 1], 0.375)):
        _check(forest.gini(counts) == want, f"gini{counts} = {forest.gini(counts)}, expected {want}")
    rng = np.random.default_rng(3)
    for _ in range(500):
        c = rng.integers(0, 40, size=2)
        if c.sum() == 0:
            continue
        got, want = forest.gini(c), _gini_exact(c.tolist())
        _check(abs(got - want) <= 1e-15, f"gini{c.tolist()} = {got}, exact {want}")
    return "hand values and 500 random count vectors agree"


def _split_oracle(X, y):
    n, d = X.shape
    parent = forest.gini(np.bincount(y, minlength=2))
    best = None
    for f in range(d):
        vals = sorted(set(X[:, f].tolist()))
        for a, b in zip(vals, vals[1:]):
            thr = (a + b) / 2.0
            if not thr < b:
                thr = a
            left = y[X[:, f] <= thr]
            right = y[X[:, f] > thr]
            dec = (parent - (len(left) / n) * forest.gini(np.bincount(left, minlength=2))
                   - (len(right) / n) * forest.gini(np.bincount(right, minlength=2)))
            if dec > forest.MIN_DECREASE and (best is None or dec > best[2]):
                best = (f, thr, dec)
    return best


def suite_best_split() -> str:
    rng = np.random.default_rng(4)
    for trial in range(300):
        n = int(rng.integers(2, 21))
        X = rng.integers(0, 6, size=(n, 5)).astype(float) * rng.choice([1.0, 0.37])
        y = rng.integers(0, 2, size=n)
        got = forest.best_split(X, y, range(5))
        want = _split_oracle(X, y)
        _check(got == want, f"trial {trial}: {got} != {want}")
    return "300 random datasets agree exactly"


def suite_synthetic_end_to_end() -> str:
    from .dataset import assemble_loso, build_samples
    from .evaluate import run_loso
    from .synthetic import make_drives

    vectors = []
    for d in make_drives(7, seed=0):
        rec, _ = preprocess_record(d.record)
        v, _ = extract_windows(slice_windows(rec, d.annotation))
        vectors += v
    folds = run_loso(assemble_loso(build_samples(vectors, 3)), forest.ForestConfig(rng_seed=0), 3)
    worst = min(f.test_accuracy for f in folds)
    _check(worst >= 0.95, f"worst fold accuracy {worst:.3f}")
    return f"7 folds, worst test accuracy {worst:.3f}"


SUITES: dict[str, Suite] = {
    "filter_dc_gain": suite_filter_dc,
    "filter_cutoff_tone": suite_filter_cutoff_tone,
    "periodogram_parseval": suite_parseval,
    "tone_band_power": suite_tone_band,
    "hrv_time_oracle": suite_hrv_time,
    "gini_oracle": suite_gini,
    "best_split_oracle": suite_best_split,
    "synthetic_end_to_end": suite_synthetic_end_to_end,
}


def run_selftest(print_fn=print) -> bool:
    ok = True
    for name, suite in SUITES.items():
        try:
            detail = suite()
            print_fn(f"PASS {name}: {detail}")
        except (AssertionError, DriveStressError, ValueError) as exc:
            ok = False
            print_fn(f"FAIL {name}: {exc}")
    return ok
