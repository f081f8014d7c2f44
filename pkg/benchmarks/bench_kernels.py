#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py
The same comparison with numba disabled everywhere:
      SPHERESHG_NO_NUMBA=1 python3 benchmarks/bench_kernels.py  (numpy only)
"""

import time

import numpy as np

from sphereshg.accel import HAVE_NUMBA, USE_NUMBA
from sphereshg.resonance import (
    SigmaRational,
    divisor_count_range,
    lambda_count_table,
    lattice_counts_sweep,
)


def timed(label, fn, *args, repeats=3, **kwargs):
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    print(f"  {label:<28s} {best * 1e3:10.2f} ms")
    return out


def main():
    print(f"numba available: {HAVE_NUMBA}, active: {USE_NUMBA}")
    sig = SigmaRational(1, 4)

    print("resonance count table, cell (128, 128), sigma = 1/4:")
    if USE_NUMBA:
        lambda_count_table(2, 2, sig, use_numba=True)  # compile outside timing
        a = timed("numba kernel", lambda_count_table, 128, 128, sig, use_numba=True)
    else:
        a = None
    b = timed("numpy fallback", lambda_count_table, 128, 128, sig, use_numba=False)
    if a is not None:
        assert a[0] == b[0] and np.array_equal(a[1], b[1]), "paths disagree"
        print("  paths agree exactly")

    print("divisor counts for n <= 200000:")
    if USE_NUMBA:
        divisor_count_range(100, use_numba=True)
        a = timed("numba kernel", divisor_count_range, 200000, use_numba=True)
    else:
        a = None
    b = timed("numpy fallback", divisor_count_range, 200000, use_numba=False)
    if a is not None:
        assert np.array_equal(a, b), "paths disagree"
        print("  paths agree exactly")

    print("lattice counts x^2 - y^2 = m, |m| <= 20000, K = 256:")
    ms = np.arange(-20000, 20001, dtype=np.int64)
    if USE_NUMBA:
        lattice_counts_sweep(ms[:64], 8, "-", use_numba=True)
        a = timed("numba kernel", lattice_counts_sweep, ms, 256, "-", use_numba=True)
    else:
        a = None
    b = timed("numpy fallback", lattice_counts_sweep, ms, 256, "-", use_numba=False)
    if a is not None:
        assert np.array_equal(a, b), "paths disagree"
        print("  paths agree exactly")


if __name__ == "__main__":
    main()
