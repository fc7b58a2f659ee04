"""Double-precision row backend: the compiled extension when available,
otherwise the pure-Python fallback.  Set QTCHAIN_PURE=1 to force the
fallback."""

from __future__ import annotations

import os

if os.environ.get("QTCHAIN_PURE"):
    from ._core_py import BACKEND, poch_inf, row_float
else:
    try:
        from ._core import BACKEND, poch_inf, row_float
    except ImportError:
        from ._core_py import BACKEND, poch_inf, row_float

__all__ = ["BACKEND", "poch_inf", "row_float"]
