"""Input-validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def check_array(X, *, allow_nan: bool = False, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array and check finiteness."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got ndim={X.ndim}")
    if not allow_nan and not np.all(np.isfinite(X)):
        raise ValidationError(f"{name} contains non-finite values")
    if allow_nan and np.any(np.isinf(X)):
        raise ValidationError(f"{name} contains infinities")
    return X


def check_X_y(X, y, *, allow_nan: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Validate a feature matrix with binary {0, 1} labels."""
    X = check_array(X, allow_nan=allow_nan)
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValidationError(f"y must be 1-D, got ndim={y.ndim}")
    if len(y) != X.shape[0]:
        raise ValidationError(f"X has {X.shape[0]} rows but y has {len(y)}")
    y_int = y.astype(np.int64)
    if not np.array_equal(y_int, y) or not np.all(np.isin(y_int, (0, 1))):
        raise ValidationError("labels must be binary 0/1")
    return X, y_int


def check_is_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise ValidationError(
            f"{type(estimator).__name__} is not fitted; call fit() first"
        )
