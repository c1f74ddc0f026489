"""Kernel backend selection.

The compiled ``_core`` extension is used when it imports; otherwise the
numpy implementations in ``_fallback`` are used. Setting the environment
variable ``TCHAR_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("TCHAR_PURE_PYTHON") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

betainc = _impl.betainc
t_lower_tail = _impl.t_lower_tail
t_lower_quantile = _impl.t_lower_quantile
qfam_cdf = _impl.qfam_cdf

__all__ = ["BACKEND", "betainc", "qfam_cdf", "t_lower_quantile", "t_lower_tail"]
