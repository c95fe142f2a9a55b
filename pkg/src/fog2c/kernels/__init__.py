"""Hot loops with a compiled backend and a pure-Python fallback.

The Cython extension ``_ckernels`` is used when it was built; set
``FOG2C_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the active one.
"""
import os

from . import _pure

try:
    if os.environ.get("FOG2C_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure Python requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pure
    BACKEND = "python"

split_search = _impl.split_search
fifo_pipeline = _impl.fifo_pipeline

BACKENDS = {"python": _pure}
try:
    from . import _ckernels

    BACKENDS["cython"] = _ckernels
except ImportError:
    pass

__all__ = ["BACKEND", "BACKENDS", "split_search", "fifo_pipeline"]
