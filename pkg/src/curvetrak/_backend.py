"""Pick the integration kernel at import time.

The compiled kernel is used when the extension was built; otherwise the
pure-Python twin takes over. Set ``CURVETRAK_PURE=1`` to force the fallback.
"""
import os

from . import _pykernel

if os.environ.get("CURVETRAK_PURE", "") not in ("", "0"):
    integrate = _pykernel.integrate
    BACKEND = "python"
else:
    try:
        from ._ckernel import integrate
        BACKEND = "cython"
    except ImportError:
        integrate = _pykernel.integrate
        BACKEND = "python"

COLUMNS = _pykernel.COLUMNS
OK, DEGENERATE, DIVERGED = _pykernel.OK, _pykernel.DEGENERATE, _pykernel.DIVERGED
EULER, MIDPOINT = _pykernel.EULER, _pykernel.MIDPOINT

__all__ = ["integrate", "BACKEND", "COLUMNS"]
