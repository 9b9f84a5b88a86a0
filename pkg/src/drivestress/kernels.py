"""Select the kernel backend at import time.

The compiled extension is used when it was built; set
``DRIVESTRESS_PURE_PYTHON=1`` to force the numpy fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("DRIVESTRESS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

lfilter = _impl.lfilter
best_split = _impl.best_split

__all__ = ["BACKEND", "lfilter", "best_split"]
