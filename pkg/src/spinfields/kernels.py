"""Backend selection for the grid kernels.

The compiled module is used when it imports; setting SPINFIELDS_PURE_PYTHON=1
forces the numpy/scipy fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("SPINFIELDS_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "compiled"

label_components = _impl.label_components
bilinear_roots = _impl.bilinear_roots
contour_length = _impl.contour_length
