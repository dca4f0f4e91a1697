"""Selects the numeric kernel backend once at import time.

The compiled extension is preferred; the NumPy implementation is the
fallback.  Set ``TWQKD_FORCE_PYTHON=1`` to skip the extension (used by the
benchmark and by tests that compare the two backends).
"""
import os

from . import _kernel_py

if os.environ.get("TWQKD_FORCE_PYTHON"):
    _impl = _kernel_py
else:
    try:
        from . import _kernel as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernel_py

BACKEND = _impl.NAME
g_entropy = _impl.g_entropy
g_sum = _impl.g_sum
sympeig_xp = _impl.sympeig_xp
