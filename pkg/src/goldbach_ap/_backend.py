"""Backend selection for the numeric kernels.

Set ``GOLDBACH_AP_BACKEND=numpy`` to force the pure-numpy fallbacks.  The
default is ``numba`` when it imports cleanly, otherwise numpy.
"""
import os

_requested = os.environ.get("GOLDBACH_AP_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"GOLDBACH_AP_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _requested == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, identity otherwise.

    The decorated function is always compiled lazily, so importing this
    module under the numpy backend costs nothing.
    """
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return _numba.njit(*args, **kwargs)
