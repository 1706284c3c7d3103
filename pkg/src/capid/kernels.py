"""Kernel backend selection.

The compiled extension is preferred when importable; setting the
environment variable CAPID_FORCE_FALLBACK=1 before import forces the numpy
implementations (the benchmark and the parity tests use this).
"""

import os

from . import _kernels_py

_impl = _kernels_py
if not os.environ.get("CAPID_FORCE_FALLBACK"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        pass

BACKEND = "numpy" if _impl is _kernels_py else "compiled"

multilinear_eval = _impl.multilinear_eval
group_mean_estimate = _impl.group_mean_estimate


def available_backends() -> dict:
    """Name -> module for every importable kernel backend."""
    backends = {"numpy": _kernels_py}
    try:
        from . import _kernels

        backends["compiled"] = _kernels
    except ImportError:
        pass
    return backends
