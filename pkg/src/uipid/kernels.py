"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``UIPID_PURE_PYTHON=1`` to force the numpy versions.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("UIPID_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

cmi_batch = _impl.cmi_batch
barrier_newton = _impl.barrier_newton
STATUS_CONVERGED = _kernels_py.STATUS_CONVERGED
STATUS_MAX_ITER = _kernels_py.STATUS_MAX_ITER
