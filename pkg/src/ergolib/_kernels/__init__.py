"""Time-grid evaluation kernels.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
NumPy fallback ``_pykernels`` is selected. Setting ``ERGOLIB_PURE_PYTHON=1``
forces the fallback.
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("ERGOLIB_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python kernels requested")
    from . import _ckernels as _impl

    BACKEND = "compiled"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

LOG_CAP = _pykernels.LOG_CAP


def _prepare(lams, orbits, orders, times):
    return (
        np.ascontiguousarray(lams, dtype=complex),
        np.ascontiguousarray(orbits, dtype=complex),
        np.ascontiguousarray(orders, dtype=np.int64),
        np.ascontiguousarray(np.atleast_1d(times), dtype=float),
    )


def trajectory_grid(lams, orbits, orders, times, backend=None):
    impl = _pykernels if backend == "python" else _impl
    return impl.trajectory_grid(*_prepare(lams, orbits, orders, times))


def cesaro_grid(lams, orbits, orders, times, backend=None):
    impl = _pykernels if backend == "python" else _impl
    return impl.cesaro_grid(*_prepare(lams, orbits, orders, times))


def available_backends():
    return ["python"] + (["compiled"] if _impl is not _pykernels else [])
