"""Select the kernel implementation at import time.

The compiled extension is preferred.  Set ``SPARSEGENRE_BACKEND=python`` to
force the numpy fallback (useful for debugging and for benchmarks).
"""
import os

from . import _kernels_py

_requested = os.environ.get("SPARSEGENRE_BACKEND", "auto").lower()

kernels = _kernels_py
BACKEND = "python"
if _requested != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        if _requested == "cython":
            raise
    else:
        kernels = _compiled
        BACKEND = "cython"


def get_kernels(name=None):
    """Return a kernel module by name (``"python"``/``"cython"``) or the active one."""
    if name is None or name == "auto":
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
