"""Process-wide limits shared by every module."""

from __future__ import annotations

import os

DEFAULT_MAX_DIM = 2**16


def max_dim() -> int:
    """Largest total Hilbert dimension any constructor may create."""
    raw = os.environ.get("LIOUV_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    value = int(raw)
    if value < 1:
        raise ValueError(f"LIOUV_MAX_DIM must be positive, got {value}")
    return value


class DimensionCapError(ValueError):
    """Raised when a construction would exceed the Hilbert-dimension cap."""


def check_dim(total: int, what: str = "operator") -> None:
    cap = max_dim()
    if total > cap:
        raise DimensionCapError(f"{what} needs dimension {total} > cap {cap} (set LIOUV_MAX_DIM)")
