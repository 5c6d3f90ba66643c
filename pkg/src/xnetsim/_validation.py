"""Input checks shared by the estimator classes."""

import numpy as np

from .exceptions import DimensionMismatch


def check_real_matrix(a, name="array"):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        raise TypeError(f"{name} must be real-valued")
    a = a.astype(np.float64, copy=False)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def check_observations(y, n_rows):
    """Return observations as ``(n_obs, n_rows)``; a single vector is promoted."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[None, :]
    if y.ndim != 2 or y.shape[1] != n_rows:
        raise DimensionMismatch(f"observations must have {n_rows} entries, got shape {y.shape}")
    return y


def check_is_fitted(est, attr):
    if not hasattr(est, attr):
        raise AttributeError(f"{type(est).__name__} is not fitted; call fit() first")
