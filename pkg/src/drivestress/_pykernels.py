"""Pure-Python/numpy versions of the hot loops.

These define the reference arithmetic; ``_ckernels.pyx`` repeats it operation
for operation so both backends return bit-identical results.
"""

from __future__ import annotations

import numpy as np


def lfilter(b, a, x, zi):
    """Direct-form II transposed IIR recurrence.

    ``a[0]`` must already be 1. Returns ``(y, zf)``.
    """
    b = np.asarray(b, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    order = len(a) - 1
    z = [float(v) for v in zi]
    bl = [float(v) for v in b]
    al = [float(v) for v in a]
    y = np.empty(len(x))
    for n, xn in enumerate(x.tolist()):
        yn = bl[0] * xn + z[0]
        for i in range(order - 1):
            z[i] = bl[i + 1] * xn + z[i + 1] - al[i + 1] * yn
        z[order - 1] = bl[order] * xn - al[order] * yn
        y[n] = yn
    return y, np.array(z)


def gini_from_counts(counts, total):
    s = 0.0
    for c in counts:
        p = c / total
        s += p * p
    return 1.0 - s


def best_split(X, y, n_classes, candidates, min_decrease):
    """Best Gini split over ``candidates`` (ascending feature indices).

    Returns ``(feature, threshold, decrease)``; ``feature == -1`` when no
    threshold improves impurity by more than ``min_decrease``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    n = len(y)
    total = np.bincount(y, minlength=n_classes)
    parent = gini_from_counts(total.tolist(), n)
    best_f, best_t, best_d = -1, np.nan, min_decrease
    if n < 2:
        return best_f, best_t, 0.0
    onehot = np.eye(n_classes, dtype=np.int64)
    nl = np.arange(1, n, dtype=np.int64)
    nr = n - nl
    for f in candidates:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        v = col[order]
        valid = v[:-1] < v[1:]
        if not valid.any():
            continue
        left = np.cumsum(onehot[y[order]], axis=0)[:-1]
        right = total - left
        sl = np.zeros(n - 1)
        sr = np.zeros(n - 1)
        for k in range(n_classes):
            pl = left[:, k] / nl
            pr = right[:, k] / nr
            sl = sl + pl * pl
            sr = sr + pr * pr
        dec = parent - (nl / n) * (1.0 - sl) - (nr / n) * (1.0 - sr)
        idx = np.flatnonzero(valid)
        j = idx[np.argmax(dec[idx])]
        if dec[j] > best_d:
            mid = (v[j] + v[j + 1]) / 2.0
            if not mid < v[j + 1]:
                mid = v[j]
            best_f, best_t, best_d = int(f), float(mid), float(dec[j])
    if best_f < 0:
        return -1, np.nan, 0.0
    return best_f, best_t, best_d
