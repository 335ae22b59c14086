"""Forecasting regressors, metrics and the feature-scheme comparison harness."""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .._validation import ValidationError, check_columns
from ..stdb import Dimension, FeatureTable
from ._base import FitError, MinMaxRegressor
from ._gbrt import GBRTForecaster
from ._mlp import MLPForecaster
from ._ridge import RidgeForecaster
from .metrics import Metrics, evaluate

__all__ = [
    "FitError", "GBRTForecaster", "MLPForecaster", "RidgeForecaster", "Metrics",
    "ModelSpec", "TrainedModel", "evaluate", "fit", "predict",
]

ESTIMATORS = {"ridge": RidgeForecaster, "gbrt": GBRTForecaster, "mlp": MLPForecaster}
# config names mapped onto estimator arguments
_ALIASES = {
    "ridge": {"lambda": "alpha"},
    "gbrt": {"trees": "n_trees", "depth": "max_depth"},
    "mlp": {"layers": "hidden_layer_sizes", "layer_sizes": "hidden_layer_sizes"},
}
MIN_TRAIN_ROWS = 50


def _check_positive(name, value):
    if isinstance(value, (list, tuple)):
        for v in value:
            _check_positive(name, v)
    elif isinstance(value, numbers.Number) and not isinstance(value, bool):
        if not value > 0:
            raise ValidationError(f"hyperparameter {name} must be positive, got {value}")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ESTIMATORS:
            raise ValidationError(f"unknown model kind {self.kind!r}; expected one of {sorted(ESTIMATORS)}")
        for k, v in self.params.items():
            _check_positive(k, v)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        if "seed" not in d:
            raise ValidationError(f"model spec {d.get('kind')!r}: seed is mandatory")
        return cls(d["kind"], dict(d.get("params", {})), int(d["seed"]))

    def build(self) -> MinMaxRegressor:
        aliases = _ALIASES[self.kind]
        kwargs = {aliases.get(k, k): v for k, v in self.params.items()}
        if "hidden_layer_sizes" in kwargs:
            kwargs["hidden_layer_sizes"] = tuple(kwargs["hidden_layer_sizes"])
        try:
            return ESTIMATORS[self.kind](seed=self.seed, **kwargs)
        except TypeError as exc:
            raise ValidationError(f"{self.kind}: {exc}") from None


@dataclass
class TrainedModel:
    """A fitted forecaster bound to the column list and date range it was trained on."""

    spec: ModelSpec
    estimator: MinMaxRegressor
    columns: list[str]
    dimensions: dict[str, Dimension]
    train_range: tuple[str, str]
    train_means: np.ndarray | None = None

    def _matrix(self, rows) -> np.ndarray:
        if isinstance(rows, FeatureTable):
            rows = rows.X
        if isinstance(rows, pd.DataFrame):
            check_columns(self.columns, list(rows.columns))
            return rows.to_numpy(dtype=float)
        arr = np.asarray(rows, dtype=float)
        return arr.reshape(0, len(self.columns)) if arr.size == 0 else arr

    def predict(self, rows) -> np.ndarray:
        X = self._matrix(rows)
        if len(X) == 0:
            return np.zeros(0)
        return self.estimator.predict(X)


def fit(spec: ModelSpec, train: FeatureTable) -> TrainedModel:
    if len(train) < MIN_TRAIN_ROWS:
        raise ValidationError(f"need at least {MIN_TRAIN_ROWS} training rows, got {len(train)}")
    if not train.is_complete():
        raise ValidationError("training table has missing values; impute first")
    est = spec.build()
    est.fit(train.X.to_numpy(dtype=float), train.y.to_numpy(dtype=float))
    dates = train.dates
    return TrainedModel(
        spec=spec,
        estimator=est,
        columns=list(train.feature_names),
        dimensions={c: train.dimensions[c] for c in train.feature_names},
        train_range=(dates[0].date().isoformat(), dates[-1].date().isoformat()),
        train_means=train.X.to_numpy(dtype=float).mean(axis=0),
    )


def predict(model: TrainedModel, rows) -> np.ndarray:
    return model.predict(rows)
