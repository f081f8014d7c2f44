"""Optional numba acceleration.

Hot kernels (resonance counting, divisor and lattice enumeration, the scan's
fused product-norm reduction) are written as plain loops and JIT-compiled
when numba is importable.  Setting the environment variable
``SPHERESHG_NO_NUMBA=1`` selects the pure-numpy fallback implementations
instead; ``benchmarks/bench_kernels.py`` compares the two paths.  Integer
kernels agree bit for bit across paths.
"""

import os
import warnings

NUMBA_DISABLED = os.environ.get("SPHERESHG_NO_NUMBA", "") not in ("", "0")

try:
    if NUMBA_DISABLED:
        raise ImportError
    import numba

    # the TBB-version advisory is noise on boxes that fall back to omp/workqueue
    warnings.filterwarnings("ignore", message=".*TBB.*", category=numba.NumbaWarning)
    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED


def maybe_njit(func):
    """JIT-compile ``func`` when numba is active, otherwise return it as-is."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


def maybe_njit_parallel(func):
    """Like maybe_njit but with threading; loops must use ``prange``."""
    if USE_NUMBA:
        return numba.njit(cache=True, parallel=True)(func)
    return func


if USE_NUMBA:
    prange = numba.prange
else:
    prange = range

