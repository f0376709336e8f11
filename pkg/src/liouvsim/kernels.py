"""Selects the compiled kernels when available.

Set ``LIOUVSIM_PURE_PYTHON=1`` to force the NumPy fallback.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("LIOUVSIM_PURE_PYTHON") == "1":
    from . import _fdcore_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _fdcore as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        from . import _fdcore_py as _impl
        BACKEND = "python"


def stencil_apply(values: np.ndarray, axis: int, coef: np.ndarray, offsets: np.ndarray,
                  h: float) -> np.ndarray:
    """Periodic ``(1/h) sum_k coef[k] f(i + offsets[k])`` along ``axis`` of ``values``."""
    v = np.asarray(values, dtype=complex)
    shape = v.shape
    before = int(np.prod(shape[:axis], dtype=int))
    after = int(np.prod(shape[axis + 1:], dtype=int))
    a = np.ascontiguousarray(v.reshape(before, shape[axis], after))
    out = _impl.stencil_apply(a, np.ascontiguousarray(coef, dtype=float),
                              np.ascontiguousarray(offsets, dtype=np.int64), 1.0 / h)
    return np.asarray(out).reshape(shape)


def boltzmann_average(energy: np.ndarray, observable: np.ndarray, temperature: float) -> float:
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    return float(_impl.boltzmann_average(np.ascontiguousarray(energy, dtype=float).ravel(),
                                         np.ascontiguousarray(observable, dtype=float).ravel(),
                                         float(temperature)))
