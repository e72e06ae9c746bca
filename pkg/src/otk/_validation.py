"""Input validation helpers shared by the functional and estimator APIs."""

import numbers

import numpy as np


def check_matrix(A, name="A"):
    """Return ``A`` as a finite, C-contiguous 2-D float64 array."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def check_vector(x, size=None, name="x"):
    """Return ``x`` as a finite 1-D float64 array, optionally of a fixed length."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if size is not None and x.shape[0] != size:
        raise ValueError(f"{name} has length {x.shape[0]}, expected {size}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def check_sparsity(k, n, name="k"):
    if not isinstance(k, numbers.Integral) or isinstance(k, bool):
        raise TypeError(f"{name} must be an integer, got {type(k).__name__}")
    k = int(k)
    if k < 0:
        raise ValueError(f"{name} must be non-negative, got {k}")
    if k > n:
        raise ValueError(f"{name}={k} exceeds the dimension n={n}")
    return k


def check_support(support, n):
    """Return a sorted int array of distinct indices in ``[0, n)``."""
    idx = np.asarray(sorted(int(i) for i in support), dtype=np.intp)
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise ValueError(f"support indices must lie in [0, {n})")
    if np.unique(idx).size != idx.size:
        raise ValueError("support indices must be distinct")
    return idx


def check_positive(value, name):
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return float(value)
