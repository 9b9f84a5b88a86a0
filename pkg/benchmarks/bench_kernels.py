"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Sizes mirror real use: one filtfilt leg over a 100 s window at 496 Hz, and a
root-node split search over 30 training rows x 16 candidate features.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from drivestress import _pykernels
from drivestress.preprocess import FilterSpec, butterworth_coefficients

try:
    from drivestress import _ckernels
except ImportError:
    _ckernels = None


def _cases(rng):
    b, a = butterworth_coefficients(FilterSpec(40.0, 496.0))
    x = rng.normal(size=49_600)
    zi = np.zeros(len(a) - 1)
    yield "lfilter 49600 samples", lambda m: m.lfilter(b, a, x, zi)

    for rows in (30, 300):
        X = rng.normal(size=(rows, 252))
        y = rng.integers(0, 2, size=rows).astype(np.intp)
        cand = sorted(rng.choice(252, size=16, replace=False).tolist())
        yield f"best_split {rows}x16", lambda m, X=X, y=y, c=cand: m.best_split(X, y, 2, c, 1e-12)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled kernels not built; timing the fallback only")

    print(f"{'kernel':<24}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for label, fn in _cases(np.random.default_rng(0)):
        best = {}
        for name, mod in backends.items():
            timer = timeit.Timer(lambda: fn(mod))
            loops, _ = timer.autorange()
            best[name] = min(timer.repeat(args.repeat, loops)) / loops
        row = f"{label:<24}" + "".join(f"{best[n] * 1e3:>11.3f} ms" for n in backends)
        if "cython" in best:
            row += f"{best['python'] / best['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
