"""Numba switch.

Set ``SBWAVE_DISABLE_NUMBA=1`` before import to force the pure-numpy kernels.
Numba being absent has the same effect.
"""
import os

_disabled = os.environ.get("SBWAVE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _disabled:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False
    _njit = None


def jit(func):
    """Compile ``func`` with ``numba.njit(cache=True)`` when acceleration is enabled."""
    if HAVE_NUMBA:
        return _njit(cache=True)(func)
    return func


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
