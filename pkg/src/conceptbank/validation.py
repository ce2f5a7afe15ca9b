"""Input validation helpers shared by the estimators."""

import numpy as np


def as_matrix(X, name="X"):
    """Coerce to a 2-D float64 array, rejecting anything else."""
    A = np.asarray(X, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite values")
    return A


def as_vector(x, name="x"):
    """Coerce to a 1-D float64 array."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {a.shape}")
    return a


def check_feature_dim(X, expected, name="X"):
    if X.shape[1] != expected:
        raise ValueError(
            f"{name} has {X.shape[1]} columns, expected {expected}"
        )


def as_signed_labels(y, n_expected):
    """Validate labels in {-1, +1} and return them as float64."""
    a = np.asarray(y, dtype=np.float64)
    if a.ndim != 1 or a.shape[0] != n_expected:
        raise ValueError(
            f"y must be a vector of length {n_expected}, got shape {a.shape}"
        )
    if not np.all(np.isin(a, (-1.0, 1.0))):
        raise ValueError("y must contain only -1 and +1 labels")
    return a


def check_positive(value, name):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")
