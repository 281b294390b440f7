"""Numba switch.

Hot kernels are written once as plain Python over numpy arrays and compiled
with ``numba.njit`` unless ``MACDMT_DISABLE_NUMBA`` is set to a non-empty,
non-zero value (or numba is missing).  The uncompiled function is always
reachable as ``kernel.py_func`` so both paths can be benchmarked side by side.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_DISABLED = os.environ.get("MACDMT_DISABLE_NUMBA", "").strip() not in ("", "0")
USE_NUMBA = numba is not None and not NUMBA_DISABLED


def njit(fn):
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    fn.py_func = fn
    return fn
