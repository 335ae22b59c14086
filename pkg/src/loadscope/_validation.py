"""Input validation helpers shared across modules."""

from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition.

    The CLI maps this to exit code 1; every other exception maps to 2.
    """


def as_float_vector(values, name: str = "values", allow_nan: bool = False) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not allow_nan and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_same_length(a: np.ndarray, b: np.ndarray, names: tuple[str, str] = ("a", "b")) -> None:
    if len(a) != len(b):
        raise ValidationError(
            f"length mismatch: {names[0]} has {len(a)} values, {names[1]} has {len(b)}"
        )


def check_non_constant(x: np.ndarray, name: str) -> None:
    if x.size == 0 or np.all(x == x[0]):
        raise ValidationError(f"zero variance input: {name} is constant")


def check_columns(expected: list[str], given: list[str]) -> None:
    """Raise if ``given`` is not exactly ``expected`` (same names, same order)."""
    if list(given) == list(expected):
        return
    missing = [c for c in expected if c not in given]
    extra = [c for c in given if c not in expected]
    if missing or extra:
        raise ValidationError(f"column mismatch: missing={missing} extra={extra}")
    raise ValidationError("column mismatch: columns are in a different order than at fit time")
