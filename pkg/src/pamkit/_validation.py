"""Small input-validation helpers used across the package."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import InputValidationError


def check_binary(u, name="u"):
    """Return ``u`` as a 1-D float array of 0/1 values or raise."""
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise InputValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    bad = ~((arr == 0.0) | (arr == 1.0))
    if bad.any():
        idx = np.flatnonzero(bad)[:5].tolist()
        raise InputValidationError(f"{name} must contain only 0/1 values; offending indices {idx}")
    return arr


def check_inputs(X):
    """Validate an sklearn-style ``X`` holding the binary input sequence."""
    X = check_array(X, ensure_2d=False, dtype=float, ensure_all_finite=True)
    return check_binary(X)


def check_responses(y, n_trials):
    """Validate responses ``y`` of shape (n, 2): columns rt (seconds), choice.

    Missing responses are NaN. Returns ``(rt, choice)`` float arrays.
    """
    y = check_array(y, ensure_2d=True, dtype=float, ensure_all_finite="allow-nan")
    if y.shape != (n_trials, 2):
        raise InputValidationError(
            f"y must have shape ({n_trials}, 2) [rt, choice], got {y.shape}"
        )
    rt, choice = y[:, 0].copy(), y[:, 1].copy()
    ok = np.isfinite(choice)
    if not np.all((choice[ok] == 0) | (choice[ok] == 1)):
        raise InputValidationError("choice column must contain only 0, 1 or NaN")
    if np.any(rt[np.isfinite(rt)] < 0):
        raise InputValidationError("response times must be non-negative")
    return rt, choice
