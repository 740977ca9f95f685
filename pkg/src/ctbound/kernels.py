"""Kernel dispatch: the compiled extension when it imports, else pure Python.

Set ``CTB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("CTB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

kruskal = _impl.kruskal
stable_sets = _impl.stable_sets
bilayer_paths = _impl.bilayer_paths

OK = _pykernels.OK
FORCED_CYCLE = _pykernels.FORCED_CYCLE
DISCONNECTED = _pykernels.DISCONNECTED

__all__ = ["BACKEND", "kruskal", "stable_sets", "bilayer_paths", "OK", "FORCED_CYCLE", "DISCONNECTED"]
