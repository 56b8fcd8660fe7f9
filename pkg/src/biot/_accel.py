"""Backend switch for the element kernels.

Set ``BIOT_NUMBA=0`` to force the pure-numpy path. ``BIOT_THREADS`` caps the
number of threads numba may use.
"""

import os

_FALSY = {"0", "false", "no", "off"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("BIOT_NUMBA", "1").strip().lower() not in _FALSY

if HAVE_NUMBA and os.environ.get("BIOT_THREADS"):
    numba.set_num_threads(max(1, min(int(os.environ["BIOT_THREADS"]), numba.config.NUMBA_NUM_THREADS)))


def njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def default_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
