"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
implementation is loaded. Set ``SRQTM_BACKEND=python`` to force the fallback.
"""
import os

if os.environ.get("SRQTM_BACKEND", "").lower() == "python":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        from . import _kernels_py as _impl

expand = _impl.expand
combine_sorted = _impl.combine_sorted
BACKEND = _impl.BACKEND


def load(name: str):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name == "python":
        from . import _kernels_py
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
