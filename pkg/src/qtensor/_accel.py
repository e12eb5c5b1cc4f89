"""Switch between numba-compiled kernels and the pure-numpy fallback.

Set ``QTENSOR_NUMBA=0`` in the environment before importing :mod:`qtensor`
to run every kernel as plain Python/numpy. Numba is used by default when it
is importable.
"""

import os

_flag = os.environ.get("QTENSOR_NUMBA", "1").strip().lower()
_wanted = _flag not in ("0", "false", "no", "off")

try:
    if not _wanted:
        raise ImportError
    import numba as _numba
except ImportError:
    _numba = None

NUMBA_ENABLED = _numba is not None


def njit(func):
    """Compile ``func`` in nopython mode, or return it untouched."""
    if _numba is None:
        return func
    return _numba.njit(cache=True)(func)


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
