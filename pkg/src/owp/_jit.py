"""JIT selection for the hot search kernels.

Kernels are written once in the numba-compatible subset of Python. When
``OWP_DISABLE_NUMBA`` is set to a truthy value (or numba is missing) the
decorator is the identity and the same source runs as plain Python over
numpy arrays, which is the reference path the benchmark compares against.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("OWP_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError
    from numba import njit as _njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False
    _njit = None


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, otherwise a pass-through decorator."""
    if NUMBA_ENABLED:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def decorator(func):
        return func

    return decorator
