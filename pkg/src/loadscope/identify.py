"""Dimension-level attribution and dominant-feature selection.

Two levels:

* ``grouped_shapley`` attributes each prediction to the dimensions (G, A, I,
  S and optionally L) by treating every dimension as one player.  A player
  that is absent has its columns set to the training means.
* ``lvkb`` drops low-variance columns and then keeps columns whose
  univariate F-statistic against the target reaches a threshold.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import ValidationError, as_float_vector, check_non_constant, check_same_length
from .stdb import Dimension, FeatureTable

MAX_EXACT_GROUPS = 8
VARIANCE_THRESHOLD = 0.88
KBEST_THRESHOLD = 10.0
_ORDER = [Dimension.G, Dimension.A, Dimension.I, Dimension.S, Dimension.L]


@dataclass
class DimensionAttribution:
    dimensions: list[str]
    values: np.ndarray  # (n_samples, n_dimensions)
    baseline: float
    predictions: np.ndarray
    dates: list[str]
    method: str = "exact"

    @property
    def mean_abs(self) -> dict[str, float]:
        return {d: float(np.mean(np.abs(self.values[:, j]))) for j, d in enumerate(self.dimensions)}

    @property
    def sign_summary(self) -> dict[str, float]:
        """Fraction of samples with a positive attribution, per dimension."""
        return {d: float(np.mean(self.values[:, j] > 0)) for j, d in enumerate(self.dimensions)}

    def ranking(self) -> list[str]:
        ma = self.mean_abs
        return sorted(ma, key=lambda d: (-ma[d], d))

    def efficiency_error(self) -> float:
        return float(np.max(np.abs(self.values.sum(axis=1) + self.baseline - self.predictions), initial=0.0))

    def to_csv(self, path, header: str = "") -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(header)
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "prediction", "baseline", *self.dimensions])
            for d, p, row in zip(self.dates, self.predictions, self.values):
                w.writerow([d, repr(float(p)), repr(self.baseline), *(repr(float(v)) for v in row)])


def _groups(model) -> tuple[list[str], list[np.ndarray]]:
    dims = [model.dimensions[c] for c in model.columns]
    names, masks = [], []
    for d in _ORDER:
        m = np.array([x is d for x in dims])
        if m.any():
            names.append(d.value)
            masks.append(m)
    return names, masks


def _sample_rows(table: FeatureTable, samples, seed: int) -> np.ndarray:
    n = len(table)
    if samples is None:
        return np.arange(n)
    if isinstance(samples, (int, np.integer)):
        if samples < 1:
            raise ValidationError("samples must be >= 1")
        if samples >= n:
            return np.arange(n)
        return np.sort(np.random.default_rng(seed).choice(n, size=int(samples), replace=False))
    arr = np.asarray(samples)
    if arr.dtype == bool:
        if len(arr) != n:
            raise ValidationError("boolean sample mask length differs from table length")
        return np.flatnonzero(arr)
    arr = arr.astype(int)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise ValidationError("sample index out of range")
    return arr


def _prepare(model, table, samples, seed):
    missing = [c for c in model.columns if c not in table.frame.columns]
    if missing:
        raise ValidationError(f"table lacks model columns: {missing}")
    rows = _sample_rows(table, samples, seed)
    X = table.frame[model.columns].to_numpy(dtype=float)[rows]
    means = model.train_means if model.train_means is not None else table.frame[model.columns].to_numpy(dtype=float).mean(axis=0)
    names, masks = _groups(model)
    dates = [table.dates[i].date().isoformat() for i in rows]
    return X, np.asarray(means, dtype=float), names, masks, dates


def _coalition_value(model, X, means, masks, coalition: int) -> np.ndarray:
    keep = np.zeros(X.shape[1], dtype=bool)
    for j, m in enumerate(masks):
        if coalition >> j & 1:
            keep |= m
    return model.predict(np.where(keep, X, means))


def grouped_shapley(model, table: FeatureTable, samples=None, seed: int = 0) -> DimensionAttribution:
    """Exact group Shapley values by enumerating every ordering of the groups.

    All ``2**g`` coalition values are computed once per sample; each ordering
    then only reads from that cache.
    """
    X, means, names, masks, dates = _prepare(model, table, samples, seed)
    g = len(names)
    if g > MAX_EXACT_GROUPS:
        raise ValidationError(f"{g} groups: use sampling variant")
    n = len(X)
    if n == 0:
        raise ValidationError("no samples selected")
    values = np.stack([_coalition_value(model, X, means, masks, c) for c in range(1 << g)])
    phi = np.zeros((n, g))
    n_perm = 0
    for perm in itertools.permutations(range(g)):
        coalition = 0
        for j in perm:
            nxt = coalition | (1 << j)
            phi[:, j] += values[nxt] - values[coalition]
            coalition = nxt
        n_perm += 1
    phi /= n_perm
    baseline = float(values[0][0])
    return DimensionAttribution(names, phi, baseline, values[-1], dates, "exact")


def grouped_shapley_sampled(model, table: FeatureTable, samples=None, n_permutations: int = 200,
                            seed: int = 0) -> DimensionAttribution:
    """Monte Carlo estimate over ``n_permutations`` random group orderings."""
    if n_permutations < 1:
        raise ValidationError("n_permutations must be >= 1")
    X, means, names, masks, dates = _prepare(model, table, samples, seed)
    g = len(names)
    if len(X) == 0:
        raise ValidationError("no samples selected")
    rng = np.random.default_rng(seed)
    cache: dict[int, np.ndarray] = {}

    def value(c):
        if c not in cache:
            cache[c] = _coalition_value(model, X, means, masks, c)
        return cache[c]

    phi = np.zeros((len(X), g))
    for _ in range(n_permutations):
        coalition = 0
        for j in rng.permutation(g):
            nxt = coalition | (1 << int(j))
            phi[:, j] += value(nxt) - value(coalition)
            coalition = nxt
    phi /= n_permutations
    full = value((1 << g) - 1)
    return DimensionAttribution(names, phi, float(value(0)[0]), full, dates, "sampled")


# ---------------------------------------------------------------- LV-KB


@dataclass
class FeatureScore:
    name: str
    dimension: str
    variance: float
    r: float = float("nan")
    f: float = float("nan")
    passed_variance: bool = False
    passed_kbest: bool = False


def f_score(x, y) -> tuple[float, float]:
    """Pearson r and the F-statistic ``r**2 / (1 - r**2) * (n - 2)``; ``|r| == 1`` gives ``inf``."""
    x = as_float_vector(x, "x")
    y = as_float_vector(y, "y")
    check_same_length(x, y, ("x", "y"))
    if len(x) < 3:
        raise ValidationError("f_score needs at least 3 samples")
    check_non_constant(x, "x")
    check_non_constant(y, "y")
    xc, yc = x - x.mean(), y - y.mean()
    r = float(np.dot(xc, yc) / np.sqrt(np.dot(xc, xc) * np.dot(yc, yc)))
    r = min(1.0, max(-1.0, r))
    r2 = r * r
    if r2 >= 1.0:
        return r, math.inf
    return r, r2 / (1.0 - r2) * (len(x) - 2)


def _candidates(table: FeatureTable, include_load: bool) -> list[str]:
    return [c for c in table.feature_names if include_load or table.dimensions[c] is not Dimension.L]


def variance_filter(table: FeatureTable, threshold: float = VARIANCE_THRESHOLD,
                    include_load: bool = False) -> list[FeatureScore]:
    """Population variance of each candidate column in raw units."""
    if not table.is_complete():
        raise ValidationError("table has missing values; impute first")
    out = []
    for c in _candidates(table, include_load):
        var = float(np.var(table.frame[c].to_numpy(dtype=float)))
        out.append(FeatureScore(c, table.dimensions[c].value, var, passed_variance=var >= threshold))
    return out


def _rank_key(s: FeatureScore):
    f = s.f if not math.isnan(s.f) else -1.0
    return (-f, s.name)


def select_features(scores: list[FeatureScore], y, table: FeatureTable, threshold: float = KBEST_THRESHOLD,
                    k: int | None = None) -> list[FeatureScore]:
    """Score every column that passed the variance filter and flag the kept ones.

    With ``k`` set, the ``k`` best-scoring columns are kept instead of
    thresholding.  Returns all scores, best first.
    """
    y = as_float_vector(y, "y")
    check_non_constant(y, "target")
    for s in scores:
        if not s.passed_variance:
            s.passed_kbest = False
            continue
        x = table.frame[s.name].to_numpy(dtype=float)
        if np.ptp(x) == 0:
            s.r, s.f = 0.0, 0.0
        else:
            s.r, s.f = f_score(x, y)
    ranked = sorted(scores, key=_rank_key)
    eligible = [s for s in ranked if s.passed_variance]
    if k is None:
        for s in eligible:
            s.passed_kbest = s.f >= threshold
    else:
        if k < 0:
            raise ValidationError("k must be >= 0")
        for i, s in enumerate(eligible):
            s.passed_kbest = i < k
    if not any(s.passed_kbest for s in ranked):
        warnings.warn("no feature passed the F-score threshold; identified set is empty", stacklevel=2)
    return ranked


@dataclass
class LVKBResult:
    scores: list[FeatureScore]
    variance_threshold: float
    kbest_threshold: float
    k: int | None = None
    selected: list[str] = field(init=False)

    def __post_init__(self):
        self.selected = [s.name for s in self.scores if s.passed_kbest]

    @property
    def counts(self) -> dict[str, int]:
        out = {d.value: 0 for d in (Dimension.G, Dimension.A, Dimension.I, Dimension.S)}
        for s in self.scores:
            if s.passed_kbest:
                out[s.dimension] = out.get(s.dimension, 0) + 1
        return out

    def scores_to_csv(self, path, header: str = "") -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(header)
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["name", "dimension", "variance", "r", "f", "passed_variance", "kept"])
            for s in self.scores:
                w.writerow([s.name, s.dimension, repr(s.variance), repr(s.r), repr(s.f),
                            int(s.passed_variance), int(s.passed_kbest)])

    def counts_to_json(self, path) -> None:
        doc = {
            "variance_threshold": self.variance_threshold,
            "kbest_threshold": self.kbest_threshold,
            "k": self.k,
            "counts": self.counts,
            "total": len(self.selected),
            "selected": self.selected,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def lvkb(table: FeatureTable, variance_threshold: float = VARIANCE_THRESHOLD,
         kbest_threshold: float = KBEST_THRESHOLD, k: int | None = None,
         include_load: bool = False) -> LVKBResult:
    """Variance filter followed by F-score selection on the non-load columns."""
    if table.y.isna().any():
        raise ValidationError("target has missing values")
    scores = variance_filter(table, variance_threshold, include_load)
    y = table.y.to_numpy(dtype=float)
    if not scores:
        return LVKBResult([], variance_threshold, kbest_threshold, k)
    scores = select_features(scores, y, table, kbest_threshold, k)
    return LVKBResult(scores, variance_threshold, kbest_threshold, k)


class LVKBSelector(SelectorMixin, BaseEstimator):
    """sklearn selector wrapping the variance + F-score filter for plain arrays."""

    def __init__(self, variance_threshold=VARIANCE_THRESHOLD, kbest_threshold=KBEST_THRESHOLD, k=None):
        self.variance_threshold = variance_threshold
        self.kbest_threshold = kbest_threshold
        self.k = k

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = as_float_vector(y, "y")
        if X.ndim != 2 or len(X) != len(y):
            raise ValidationError("X must be 2-D with one row per target value")
        self.n_features_in_ = X.shape[1]
        self.variances_ = X.var(axis=0)
        self.scores_ = np.full(X.shape[1], np.nan)
        passed = self.variances_ >= self.variance_threshold
        check_non_constant(y, "target")
        for j in np.flatnonzero(passed):
            self.scores_[j] = 0.0 if np.ptp(X[:, j]) == 0 else f_score(X[:, j], y)[1]
        mask = np.zeros(X.shape[1], dtype=bool)
        if self.k is None:
            mask[passed] = self.scores_[passed] >= self.kbest_threshold
        else:
            idx = np.flatnonzero(passed)
            order = idx[np.argsort(-self.scores_[idx], kind="stable")]
            mask[order[: self.k]] = True
        self.support_ = mask
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "support_")
        return self.support_
