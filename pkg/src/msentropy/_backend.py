"""Kernel backend selection.

The environment variable ``MSENTROPY_BACKEND`` picks the implementation
of the O(N^2) entropy kernels:

* ``auto`` (default): JIT backend when numba imports, numpy otherwise;
* ``numba``: require the JIT backend, fail loudly if it cannot load;
* ``numpy``: force the vectorized fallback.

The choice is made once at import time; ``active_backend()`` reports it.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("MSENTROPY_BACKEND", "auto").strip().lower()
if _FLAG not in ("auto", "numba", "numpy"):
    raise ImportError(
        f"MSENTROPY_BACKEND must be 'auto', 'numba' or 'numpy', got {_FLAG!r}")

if _FLAG == "numpy":
    from . import _kernels_numpy as _impl
    _NAME = "numpy"
else:
    try:
        from . import _kernels_numba as _impl
        _NAME = "numba"
    except ImportError:
        if _FLAG == "numba":
            raise
        from . import _kernels_numpy as _impl
        _NAME = "numpy"


def kernels():
    """The active kernel module (``fuzzy_phis``, ``sample_counts``, ``approx_phi``)."""
    return _impl


def active_backend() -> str:
    """Name of the backend in use, ``"numba"`` or ``"numpy"``."""
    return _NAME
