"""Small input-validation helpers used by the public entry points."""

import numpy as np

from .exceptions import DimensionError


def as_binary_vector(x, name):
    """Coerce ``x`` into a 1-d int array of 0/1 entries."""
    arr = np.asarray(x)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionError(f"{name} must be a nonempty 1-d sequence")
    vals = np.unique(arr)
    if not np.isin(vals, (0, 1)).all():
        raise ValueError(f"{name} entries must all be 0 or 1, got {vals}")
    return arr.astype(np.int8)


def as_float_vector(x, name, allow_empty=False):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-d, got shape {arr.shape}")
    if arr.size == 0 and not allow_empty:
        raise DimensionError(f"{name} must be nonempty")
    return arr


def check_level(value, name):
    """Error levels (alpha, beta, Storey lambda) must lie strictly in (0, 1)."""
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")
    return value


def check_positive(value, name):
    value = float(value)
    if not value > 0.0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
