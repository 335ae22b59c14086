from __future__ import annotations

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import ValidationError, check_columns


class FitError(RuntimeError):
    """Training failed at runtime (e.g. divergence)."""


class MinMaxRegressor(RegressorMixin, BaseEstimator):
    """Shared input handling: column checks and min-max scaling fitted on train only."""

    def _validate_fit(self, X, y):
        if isinstance(X, pd.DataFrame):
            self.feature_names_in_ = np.asarray(X.columns, dtype=object)
        elif hasattr(self, "feature_names_in_"):
            del self.feature_names_in_
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).ravel()
        if X.ndim != 2:
            raise ValidationError(f"X must be 2-D, got shape {X.shape}")
        if len(X) != len(y):
            raise ValidationError(f"X has {len(X)} rows, y has {len(y)}")
        if len(X) == 0:
            raise ValidationError("empty training set")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValidationError("non-finite values in training data")
        self.n_features_in_ = X.shape[1]
        self.x_min_ = X.min(axis=0)
        rng = X.max(axis=0) - self.x_min_
        self.x_range_ = np.where(rng > 0, rng, 1.0)
        return self._scale(X), y

    def _scale(self, X: np.ndarray) -> np.ndarray:
        return (X - self.x_min_) / self.x_range_

    def _validate_predict(self, X) -> np.ndarray:
        check_is_fitted(self, "n_features_in_")
        names = getattr(self, "feature_names_in_", None)
        if isinstance(X, pd.DataFrame) and names is not None:
            check_columns(list(names), list(X.columns))
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, self.n_features_in_) if X.size else X.reshape(0, self.n_features_in_)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        if not np.isfinite(X).all():
            raise ValidationError("non-finite values in prediction input")
        return self._scale(X)
