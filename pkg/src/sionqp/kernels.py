"""Backend selection for the brute-force kernels.

The compiled extension is used when it imported cleanly; setting
``SIONQP_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("SIONQP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

enumerate_binary = _impl.enumerate_binary
scan_grid = _impl.scan_grid


def backends():
    """Available implementations keyed by name (used by tests and benchmarks)."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels
        found["cython"] = _kernels
    except ImportError:
        pass
    return found
