"""Post-identification analysis: Sobol indices, partial dependence, lag correlation, beeswarm export."""

from __future__ import annotations

import csv
import itertools
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.stats import norm, qmc

from . import plotting
from ._validation import ValidationError, as_float_vector, check_non_constant, check_same_length
from .stdb import Dimension, FeatureTable

AGGREGATE_DIMENSIONS = (Dimension.G, Dimension.A, Dimension.I, Dimension.S)
MIN_SOBOL_N = 100
N_BOOTSTRAP = 100


def _fmt(v) -> str:
    return "non" if v is None or (isinstance(v, float) and np.isnan(v)) else f"{v:.4f}"


# ---------------------------------------------------------------- aggregation


def dimension_aggregate(table: FeatureTable, dimensions=AGGREGATE_DIMENSIONS) -> FeatureTable:
    """Per-row mean of the min-max normalized member features of each dimension.

    Returns a table with one column per dimension (named by its tag) plus the target.
    """
    if not table.is_complete():
        raise ValidationError("table has missing values; impute first")
    cols = {}
    for d in dimensions:
        d = Dimension.parse(d)
        names = table.names_in(d)
        if not names:
            raise ValidationError(f"dimension {d.value} has no features")
        block = table.frame[names].to_numpy(dtype=float)
        lo, hi = block.min(axis=0), block.max(axis=0)
        flat = [n for n, r in zip(names, hi - lo) if r == 0]
        if flat:
            raise ValidationError(f"zero range in min-max for {flat}; drop constant features first")
        cols[d.value] = ((block - lo) / (hi - lo)).mean(axis=1)
    frame = pd.DataFrame(cols, index=table.dates)
    frame[table.target] = table.y.to_numpy()
    dims = {k: Dimension.parse(k) for k in cols}
    dims[table.target] = Dimension.L
    return FeatureTable(frame, dims, table.target, {k: "1" for k in cols} | {table.target: table.units.get(table.target, "")})


# ---------------------------------------------------------------- Sobol


@dataclass
class SobolReport:
    names: list[str]
    S1: np.ndarray
    S1conf: np.ndarray
    ST: np.ndarray
    STconf: np.ndarray
    S2: np.ndarray  # (d, d), upper triangle filled, NaN elsewhere
    S2conf: np.ndarray
    n: int
    seed: int

    def to_table(self) -> list[list[str]]:
        """Rows of ``Tasks, ST, S1, S2, STconf, S1conf, S2conf`` with ``non`` for inapplicable cells."""
        rows = [["Tasks", "ST", "S1", "S2", "STconf", "S1conf", "S2conf"]]
        for j, name in enumerate(self.names):
            rows.append([name, _fmt(self.ST[j]), _fmt(self.S1[j]), "non",
                         _fmt(self.STconf[j]), _fmt(self.S1conf[j]), "non"])
        for j, k in itertools.combinations(range(len(self.names)), 2):
            rows.append([f"{self.names[j]}+{self.names[k]}", "non", "non", _fmt(self.S2[j, k]),
                         "non", "non", _fmt(self.S2conf[j, k])])
        return rows

    def to_csv(self, path, header: str = "") -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(header)
            csv.writer(fh, lineterminator="\n").writerows(self.to_table())


def saltelli_sample(bounds, n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Base matrices A, B and the mixed matrices AB_j (A with column j from B) and BA_j."""
    bounds = np.asarray(bounds, dtype=float)
    d = len(bounds)
    sampler = qmc.Sobol(d=2 * d, scramble=True, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # balance warning for n not a power of two
        base = sampler.random(n)
    lo, hi = bounds[:, 0], bounds[:, 1]
    A = lo + base[:, :d] * (hi - lo)
    B = lo + base[:, d:] * (hi - lo)
    AB = np.repeat(A[None], d, axis=0)
    BA = np.repeat(B[None], d, axis=0)
    for j in range(d):
        AB[j, :, j] = B[:, j]
        BA[j, :, j] = A[:, j]
    return A, B, AB, BA


def _indices(fA, fB, fAB, fBA, rows=None):
    if rows is not None:
        fA, fB, fAB, fBA = fA[rows], fB[rows], fAB[:, rows], fBA[:, rows]
    var = np.var(np.concatenate([fA, fB]))
    if var == 0:
        raise ValidationError("model output has zero variance over the sample")
    S1 = np.mean(fB * (fAB - fA), axis=1) / var
    ST = 0.5 * np.mean((fA - fAB) ** 2, axis=1) / var
    d = len(fAB)
    S2 = np.full((d, d), np.nan)
    for j, k in itertools.combinations(range(d), 2):
        vjk = np.mean(fBA[j] * fAB[k] - fA * fB) / var
        S2[j, k] = vjk - S1[j] - S1[k]
    return S1, ST, S2


def sobol_indices(model_fn, bounds, n: int = 1000, seed: int = 0, names=None,
                  n_bootstrap: int = N_BOOTSTRAP) -> SobolReport:
    """First, total and second-order Sobol indices for independent uniform inputs.

    ``model_fn`` maps an ``(m, d)`` array to ``m`` outputs.  Uses ``(2d + 2) * n``
    evaluations; confidence half-widths come from a row bootstrap.
    """
    if n < MIN_SOBOL_N:
        raise ValidationError(f"sample budget too small: n={n} < {MIN_SOBOL_N}")
    bounds = np.asarray(bounds, dtype=float)
    if bounds.ndim != 2 or bounds.shape[1] != 2 or not np.isfinite(bounds).all():
        raise ValidationError("bounds must be finite [lo, hi] pairs")
    if np.any(bounds[:, 0] >= bounds[:, 1]):
        raise ValidationError("every bound needs lo < hi")
    d = len(bounds)
    names = list(names) if names is not None else [f"x{j + 1}" for j in range(d)]
    A, B, AB, BA = saltelli_sample(bounds, n, seed)
    stacked = np.concatenate([A, B, AB.reshape(-1, d), BA.reshape(-1, d)])
    out = np.asarray(model_fn(stacked), dtype=float).ravel()
    if out.shape != (len(stacked),) or not np.isfinite(out).all():
        raise ValidationError("model_fn must return one finite value per row")
    # indices are invariant to an affine map of the output; standardizing
    # keeps the estimators' sampling variance independent of the output level
    sd = out.std()
    if sd == 0:
        raise ValidationError("model output has zero variance over the sample")
    out = (out - out.mean()) / sd
    fA, fB = out[:n], out[n:2 * n]
    fAB = out[2 * n:2 * n + d * n].reshape(d, n)
    fBA = out[2 * n + d * n:].reshape(d, n)
    S1, ST, S2 = _indices(fA, fB, fAB, fBA)

    rng = np.random.default_rng(seed)
    boot = [_indices(fA, fB, fAB, fBA, rng.integers(0, n, n)) for _ in range(n_bootstrap)]
    z = norm.ppf(0.975)
    S1conf = z * np.std([b[0] for b in boot], axis=0, ddof=1)
    STconf = z * np.std([b[1] for b in boot], axis=0, ddof=1)
    S2conf = z * np.std([b[2] for b in boot], axis=0, ddof=1)
    return SobolReport(names, S1, S1conf, ST, STconf, S2, S2conf, n, seed)


def ishigami(X, a: float = 7.0, b: float = 0.1) -> np.ndarray:
    X = np.atleast_2d(X)
    return np.sin(X[:, 0]) + a * np.sin(X[:, 1]) ** 2 + b * X[:, 2] ** 4 * np.sin(X[:, 0])


def ishigami_indices(a: float = 7.0, b: float = 0.1) -> dict[str, np.ndarray]:
    """Closed-form first and total-order indices of the Ishigami function on U(-pi, pi)^3."""
    pi = np.pi
    v1 = 0.5 * (1 + b * pi**4 / 5) ** 2
    v2 = a**2 / 8
    v13 = b**2 * pi**8 * (1 / 18 - 1 / 50)
    var = v1 + v2 + v13
    return {"S1": np.array([v1, v2, 0.0]) / var, "ST": np.array([v1 + v13, v2, v13]) / var}


# ---------------------------------------------------------------- partial dependence


@dataclass
class PDPCurve:
    feature: str
    grid: np.ndarray
    pd: np.ndarray
    n: int

    def to_csv(self, path, header: str = "") -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(header)
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([self.feature, "partial_dependence"])
            for g, p in zip(self.grid, self.pd):
                w.writerow([repr(float(g)), repr(float(p))])

    def to_svg(self, header: str = "") -> str:
        return plotting.line_chart(self.grid, {"PD": self.pd}, f"Partial dependence: {self.feature}",
                                   self.feature, "predicted target", header)


def partial_dependence(model, train: FeatureTable, feature: str, grid_size: int = 20) -> PDPCurve:
    """Average prediction over training rows with ``feature`` forced to each grid value."""
    if feature not in model.columns:
        raise ValidationError(f"feature {feature!r} not among model columns")
    if grid_size < 2:
        raise ValidationError("grid_size must be >= 2")
    X = train.frame[model.columns].to_numpy(dtype=float)
    j = model.columns.index(feature)
    lo, hi = float(X[:, j].min()), float(X[:, j].max())
    if not hi > lo:
        raise ValidationError(f"degenerate grid: feature {feature!r} is constant on train")
    grid = np.linspace(lo, hi, grid_size)
    n = len(X)
    stacked = np.repeat(X[None], grid_size, axis=0)
    stacked[:, :, j] = grid[:, None]
    preds = model.predict(stacked.reshape(-1, X.shape[1])).reshape(grid_size, n)
    return PDPCurve(feature, grid, preds.mean(axis=1), n)


# ---------------------------------------------------------------- lag correlation


@dataclass
class LagReport:
    feature: str
    correlations: dict[int, float]
    best_lag: int
    best_r: float


def lag_correlation(x, y, max_lag: int, feature: str = "x") -> LagReport:
    """Pearson r between ``y(t)`` and ``x(t - k)`` for ``k = 0..max_lag``; ties go to the smaller lag."""
    x = as_float_vector(x, "x")
    y = as_float_vector(y, "y")
    check_same_length(x, y, ("x", "y"))
    if max_lag < 0 or int(max_lag) != max_lag:
        raise ValidationError("max_lag must be a non-negative integer")
    if len(x) <= max_lag + 30:
        raise ValidationError(f"series length {len(x)} must exceed max_lag + 30 = {max_lag + 30}")
    check_non_constant(x, feature)
    check_non_constant(y, "target")
    n = len(x)
    corr = {}
    for k in range(int(max_lag) + 1):
        a, b = x[: n - k], y[k:]
        if np.ptp(a) == 0 or np.ptp(b) == 0:
            corr[k] = 0.0
            continue
        ac, bc = a - a.mean(), b - b.mean()
        r = float(np.dot(ac, bc) / np.sqrt(np.dot(ac, ac) * np.dot(bc, bc)))
        corr[k] = min(1.0, max(-1.0, r))
    lags = np.arange(int(max_lag) + 1)
    best = int(lags[np.argmax([abs(corr[k]) for k in lags])])
    return LagReport(feature, corr, best, corr[best])


def write_lags_csv(reports: list[LagReport], path, header: str = "") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(header)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "lag", "r", "best"])
        for rep in reports:
            for k, r in rep.correlations.items():
                w.writerow([rep.feature, k, repr(r), int(k == rep.best_lag)])


# ---------------------------------------------------------------- beeswarm


def beeswarm_export(attribution, out_dir, feature_values=None, seed: int = 0, header: str = "",
                    stem: str = "beeswarm") -> tuple[Path, Path]:
    """Write ``<stem>.csv`` (sample, name, value, feature_value) and a seeded strip-plot SVG.

    ``header`` is the CSV comment line; the SVG gets the same text as an XML comment.

    ``attribution`` is a :class:`~loadscope.identify.DimensionAttribution` or a
    ``(names, matrix)`` pair with one column per name.
    """
    if hasattr(attribution, "dimensions"):
        names, values = list(attribution.dimensions), np.asarray(attribution.values, dtype=float)
    else:
        names, values = list(attribution[0]), np.asarray(attribution[1], dtype=float)
    values = np.atleast_2d(values)
    if values.size == 0 or values.shape[1] != len(names):
        raise ValidationError("attribution matrix is empty or does not match its names")
    fv = None if feature_values is None else np.atleast_2d(np.asarray(feature_values, dtype=float))
    if fv is not None and fv.shape != values.shape:
        raise ValidationError("feature_values shape differs from the attribution matrix")
    out_dir = Path(out_dir)
    csv_path, svg_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.svg"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        fh.write(header)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "name", "value", "feature_value"])
        for i in range(len(values)):
            for j, name in enumerate(names):
                w.writerow([i, name, repr(float(values[i, j])), "" if fv is None else repr(float(fv[i, j]))])
    svg_header = header.strip().removeprefix("#").strip()
    svg = plotting.strip_plot(names, values, "Attribution per sample", seed=seed, color_values=fv, header=svg_header)
    svg_path.write_text(svg, encoding="utf-8")
    return csv_path, svg_path
