"""Independent reference implementations used only by the tests.

Nothing here imports the code under test except where noted; each oracle
follows the textbook definition with plain loops.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction


def hrv_time(nn):
    nn = [float(v) for v in nn]
    n = len(nn)
    mean = sum(nn) / n
    d = [nn[i + 1] - nn[i] for i in range(n - 1)]
    m = len(d)
    dmean = sum(d) / m
    hr = [60000.0 / v for v in nn]
    hmean = sum(hr) / n
    s = sorted(nn)
    median = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
    sdnn = math.sqrt(sum((v - mean) ** 2 for v in nn) / n)
    rmssd = math.sqrt(sum(v * v for v in d) / m)
    nn50 = sum(1 for v in d if abs(v) > 50)
    nn20 = sum(1 for v in d if abs(v) > 20)
    return [
        mean, sdnn, math.sqrt(sum((v - dmean) ** 2 for v in d) / m), rmssd, median,
        nn50, 100.0 * nn50 / m, nn20, 100.0 * nn20 / m, rmssd / mean, sdnn / mean,
        hmean, max(hr), min(hr), math.sqrt(sum((v - hmean) ** 2 for v in hr) / n),
    ]


def gini_exact(counts) -> Fraction:
    total = sum(counts)
    return 1 - sum(Fraction(int(c), total) ** 2 for c in counts)


def gini_float(counts) -> float:
    total = sum(int(c) for c in counts)
    s = 0.0
    for c in counts:
        p = int(c) / total
        s += p * p
    return 1.0 - s


def best_split_exhaustive(X, y, features, min_decrease=1e-12):
    """Every (feature, midpoint) pair, scored with the same float formula."""
    rows = [list(map(float, r)) for r in X]
    labels = [int(v) for v in y]
    n = len(labels)
    k = max(labels) + 1 if labels else 2
    k = max(k, 2)
    parent = gini_float([labels.count(c) for c in range(k)])
    best = None
    for f in sorted(features):
        vals = sorted({r[f] for r in rows})
        for a, b in zip(vals, vals[1:]):
            thr = (a + b) / 2.0
            if not thr < b:
                thr = a
            left = [lab for r, lab in zip(rows, labels) if r[f] <= thr]
            right = [lab for r, lab in zip(rows, labels) if r[f] > thr]
            dec = (
                parent
                - (len(left) / n) * gini_float([left.count(c) for c in range(k)])
                - (len(right) / n) * gini_float([right.count(c) for c in range(k)])
            )
            if dec > min_decrease and (best is None or dec > best[2]):
                best = (f, thr, dec)
    return best


def dft_periodogram(x, fs):
    """One-sided PSD by a direct O(N^2) DFT."""
    n = len(x)
    mean = sum(x) / n
    xc = [v - mean for v in x]
    out = []
    for k in range(n // 2 + 1):
        s = sum(xc[t] * cmath.exp(-2j * math.pi * k * t / n) for t in range(n))
        p = abs(s) ** 2 / (fs * n)
        if k != 0 and not (n % 2 == 0 and k == n // 2):
            p *= 2
        out.append(p)
    return [k * fs / n for k in range(n // 2 + 1)], out


def butterworth_digital_gain(f, fc, fs, order=5):
    """|H(f)| of the prewarped bilinear Butterworth low-pass."""
    ratio = math.tan(math.pi * f / fs) / math.tan(math.pi * fc / fs)
    return 1.0 / math.sqrt(1.0 + ratio ** (2 * order))


def confusion_metrics(pairs, n_classes=2):
    """Precision/recall/F1 per class by recounting (actual, predicted) pairs."""
    out = []
    for k in range(n_classes):
        tp = sum(1 for a, p in pairs if a == k and p == k)
        pred = sum(1 for _, p in pairs if p == k)
        act = sum(1 for a, _ in pairs if a == k)
        prec = tp / pred if pred else 0.0
        rec = tp / act if act else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        out.append((prec, rec, f1, act))
    acc = sum(1 for a, p in pairs if a == p) / len(pairs)
    return out, acc
