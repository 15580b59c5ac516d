"""Numba acceleration toggle.

Hot kernels (the embedded RK4(5) stepping loop, the banded LU) are written as
plain Python functions operating on numpy arrays and are jitted here when
numba is available. Setting ``BLOWUPLAB_NO_NUMBA=1`` in the environment forces
the pure-numpy path; the same source runs either way, so both paths produce
the same floating point sequences.
"""
from __future__ import annotations

import os

_ENV_FLAG = "BLOWUPLAB_NO_NUMBA"


def _detect() -> bool:
    if os.environ.get(_ENV_FLAG, "").strip() not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _detect()

if NUMBA_ENABLED:
    from numba import njit as _njit

    def jit_kernel(func):
        """Compile a hot kernel; identity when the fallback path is active."""
        return _njit(cache=True)(func)

else:

    def jit_kernel(func):
        return func


def accel_mode() -> str:
    """Short label for manifests and benchmark output."""
    return "numba" if NUMBA_ENABLED else "numpy"
