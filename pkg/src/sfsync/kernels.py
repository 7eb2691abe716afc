"""Kernel backend selected at import time.

The compiled extension ``sfsync._ckernels`` is used when it is importable;
otherwise the pure-Python module is used.  Setting the environment variable
``SFSYNC_PURE_PYTHON=1`` forces the fallback.
"""
import os

from sfsync import _pykernels

if os.environ.get("SFSYNC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from sfsync import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

bfs = _impl.bfs
brandes_closeness = _impl.brandes_closeness
euler_csr = _impl.euler_csr


def available_backends():
    """Return ``{name: module}`` for every kernel backend that can be imported."""
    out = {"python": _pykernels}
    try:
        from sfsync import _ckernels
        out["compiled"] = _ckernels
    except ImportError:
        pass
    return out
