"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when
``MUSCLESIM_PURE_PYTHON`` is set to a non-empty value, the pure-Python
kernels are used. Both expose an identical function set.
"""
import os

from . import _kernels_py

if os.environ.get("MUSCLESIM_PURE_PYTHON"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"

__all__ = ["BACKEND", "kernels"]
