"""Hot sequence and distance kernels with a numba path and a numpy fallback.

The numba path is used when numba imports and ``ISOUNIT_DISABLE_NUMBA`` is
unset (or ``0``). Both backends expose the same functions and produce
identical results; :func:`get_backend` returns either one explicitly.
"""
import os

from . import numpy_backend

try:
    from . import numba_backend
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_backend = None

HAVE_NUMBA = numba_backend is not None
_DISABLED = os.environ.get("ISOUNIT_DISABLE_NUMBA", "").strip() not in ("", "0")

active = numba_backend if (HAVE_NUMBA and not _DISABLED) else numpy_backend


def available_backends():
    names = ["numpy"]
    if HAVE_NUMBA:
        names.append("numba")
    return names


def get_backend(name=None):
    if name is None:
        return active
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        if not HAVE_NUMBA:
            raise ImportError("numba is not installed")
        return numba_backend
    raise ValueError(f"unknown backend {name!r}")
