"""Minimal sklearn-compatible estimator plumbing (get_params/set_params)."""

from __future__ import annotations

import inspect

import numpy as np

from ..errors import ValidationError


class BaseEstimator:
    """Parameter introspection in the sklearn style.

    Constructor arguments are the estimator's parameters; fitted state lives
    in trailing-underscore attributes set by ``fit``.
    """

    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [p for p in sig.parameters if p != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params) -> "BaseEstimator":
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValidationError(
                    f"invalid parameter {key!r} for {type(self).__name__}"
                )
            setattr(self, key, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in sorted(self.get_params().items()))
        return f"{type(self).__name__}({args})"


def clone(estimator: BaseEstimator) -> BaseEstimator:
    """Fresh unfitted copy with the same parameters."""
    return type(estimator)(**estimator.get_params())


class ClassifierMixin:
    def score(self, X, y) -> float:
        """Mean accuracy on the given data."""
        preds = self.predict(X)
        return float(np.mean(np.asarray(preds) == np.asarray(y)))
