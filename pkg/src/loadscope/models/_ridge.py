from __future__ import annotations

import numpy as np

from ._base import MinMaxRegressor


class RidgeForecaster(MinMaxRegressor):
    """Closed-form ridge regression on min-max scaled inputs; the intercept is not penalized.

    Parameters
    ----------
    alpha : float, default=1e-3
    seed : int, default=0
        Unused; kept so every forecaster takes the same arguments.
    """

    def __init__(self, alpha=1e-3, seed=0):
        self.alpha = alpha
        self.seed = seed

    def fit(self, X, y):
        Z, y = self._validate_fit(X, y)
        z_mean = Z.mean(axis=0)
        y_mean = y.mean()
        Zc = Z - z_mean
        gram = Zc.T @ Zc + self.alpha * np.eye(Z.shape[1])
        self.coef_ = np.linalg.solve(gram, Zc.T @ (y - y_mean))
        self.intercept_ = float(y_mean - z_mean @ self.coef_)
        resid = y - self.intercept_ - Z @ self.coef_
        self.train_loss_ = float(np.mean(resid**2))
        return self

    @property
    def raw_coef_(self) -> np.ndarray:
        """Coefficients in the units of the unscaled inputs."""
        return self.coef_ / self.x_range_

    def predict(self, X):
        Z = self._validate_predict(X)
        return self.intercept_ + Z @ self.coef_
