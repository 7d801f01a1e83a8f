"""Input validation helpers shared across the package.

Most estimators and DSP routines accept plain array-likes; these helpers
normalize them to contiguous complex/float ndarrays and raise uniform,
field-named errors. scikit-learn's ``check_array`` rejects complex data,
so the complex-aware checks live here.
"""

from __future__ import annotations

import numbers

import numpy as np


def check_complex_vector(x, name="x", min_length=1):
    """Coerce ``x`` to a 1-D complex128 ndarray and check finiteness."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(f"{name} must have at least {min_length} samples, got {arr.size}")
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


def check_complex_matrix(x, name="X", min_rows=1, min_cols=1):
    """Coerce ``x`` to a 2-D complex128 ndarray and check finiteness."""
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    rows, cols = arr.shape
    if rows < min_rows or cols < min_cols:
        raise ValueError(
            f"{name} must be at least {min_rows}x{min_cols}, got {rows}x{cols}"
        )
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_real_vector(x, name="x", min_length=1):
    """Coerce ``x`` to a 1-D float64 ndarray and check finiteness."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(f"{name} must have at least {min_length} samples, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


def check_positive(value, name="value"):
    """Check that a scalar is a finite real number > 0."""
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a finite positive number, got {value!r}")
    return float(value)


def check_nonnegative_int(value, name="value", minimum=0):
    """Check that a scalar is an integer >= ``minimum``."""
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_in_unit_interval(value, name="value", open_left=False, open_right=False):
    """Check that a scalar lies in [0, 1] (optionally open at either end)."""
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    lo_ok = value > 0 if open_left else value >= 0
    hi_ok = value < 1 if open_right else value <= 1
    if not (lo_ok and hi_ok):
        lo = "(" if open_left else "["
        hi = ")" if open_right else "]"
        raise ValueError(f"{name} must lie in {lo}0, 1{hi}, got {value!r}")
    return float(value)
