"""Optional numba acceleration.

Set ``G2FLOW_NUMBA=0`` in the environment (before import) to force the
pure-numpy code paths. When numba is missing the numpy paths are used
automatically.
"""
import os

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("G2FLOW_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def njit(func):
    """``numba.njit(cache=True)`` when numba is usable, else a no-op."""
    if NUMBA_AVAILABLE:
        return numba.njit(cache=True)(func)
    return func


def select(jitted, fallback):
    """Pick the jitted kernel or its numpy twin according to ``USE_NUMBA``."""
    return jitted if USE_NUMBA else fallback
