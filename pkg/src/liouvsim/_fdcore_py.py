"""NumPy fallback with the same interface as the compiled ``_fdcore``."""

from __future__ import annotations

import numpy as np


def stencil_apply(a: np.ndarray, coef: np.ndarray, offsets: np.ndarray, inv_h: float) -> np.ndarray:
    out = np.zeros_like(a, dtype=complex)
    for c, k in zip(coef, offsets):
        if c != 0.0:
            out += (c * inv_h) * np.roll(a, -int(k), axis=1)
    return out


def boltzmann_average(energy: np.ndarray, observable: np.ndarray, temperature: float) -> float:
    e = np.asarray(energy, dtype=float)
    w = np.exp(-(e - e.min()) / temperature)
    return float(np.dot(w, observable) / w.sum())
