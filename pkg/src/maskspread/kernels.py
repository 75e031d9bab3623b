"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise, or when
``MASKSPREAD_PURE_PYTHON`` is set to a non-empty value, the numpy fallback is
loaded. Both backends produce identical outputs for identical inputs.
"""
import importlib
import os

from . import _kernels_py


def load(name=None):
    """Return the kernel module for ``name`` ("cython", "python" or None for auto)."""
    if name == "python":
        return _kernels_py
    if name not in (None, "cython"):
        raise ValueError(f"unknown kernel backend {name!r}")
    try:
        return importlib.import_module("maskspread._kernels")
    except ImportError:
        if name == "cython":
            raise
        return _kernels_py


_active = _kernels_py if os.environ.get("MASKSPREAD_PURE_PYTHON") else load()

BACKEND = _active.BACKEND
build_adjacency = _active.build_adjacency
spread = _active.spread
