from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .._validation import ValidationError, as_float_vector, check_same_length


@dataclass(frozen=True)
class Metrics:
    mape: float  # percent
    rmse: float
    mae: float
    n: int

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate(y_true, y_pred) -> Metrics:
    y_true = as_float_vector(y_true, "y_true")
    y_pred = as_float_vector(y_pred, "y_pred")
    check_same_length(y_true, y_pred, ("y_true", "y_pred"))
    if len(y_true) == 0:
        raise ValidationError("cannot evaluate an empty set")
    if np.any(y_true == 0):
        raise ValidationError("MAPE undefined: y_true contains zeros")
    err = y_pred - y_true
    return Metrics(
        mape=float(100.0 * np.mean(np.abs(err / y_true))),
        rmse=float(np.sqrt(np.mean(err**2))),
        mae=float(np.mean(np.abs(err))),
        n=len(y_true),
    )
