"""Optional numba acceleration.

Set ``XP_DISABLE_NUMBA=1`` to force the pure-numpy code paths. ``XP_THREADS``
caps the numba thread pool.
"""
import os

_flag = os.environ.get("XP_DISABLE_NUMBA", "").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None
else:
    # the bundled TBB is too old on some hosts; skip the noisy probe
    if not os.environ.get("NUMBA_THREADING_LAYER"):
        numba.config.THREADING_LAYER = "omp"

USE_NUMBA = numba is not None and not DISABLED


def njit(*args, **kwargs):
    if USE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


prange = numba.prange if USE_NUMBA else range


def apply_thread_cap():
    cap = os.environ.get("XP_THREADS")
    if not cap or not USE_NUMBA:
        return None
    n = max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


apply_thread_cap()
