"""Four-dimension feature store: ingestion, calendar alignment, imputation, lags and schemes.

Per-feature CSV files have a ``date,value`` header with ISO dates.  A manifest
(JSON array of ``{file, name, dimension, unit, cadence}``) declares how each
file is read.  The assembled store is written as a wide CSV with a
``date,DIM:name,...`` header next to a ``.meta.json`` sidecar.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import ValidationError

logger = logging.getLogger(__name__)

MISSING_MARKERS = {"", "na", "n/a", "null"}
DATE_FEATURES = tuple(f"dow_{i}" for i in range(7)) + ("doy_sin", "doy_cos")


class Dimension(str, Enum):
    G = "G"
    A = "A"
    I = "I"  # noqa: E741
    S = "S"
    L = "L"

    @property
    def long_name(self) -> str:
        return _LONG_NAMES[self]

    @classmethod
    def parse(cls, tag) -> "Dimension":
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).strip().upper())
        except ValueError:
            raise ValidationError(f"unknown dimension tag {tag!r}") from None


_LONG_NAMES = {
    Dimension.G: "geography",
    Dimension.A: "astronomy",
    Dimension.I: "integrated_energy",
    Dimension.S: "society",
    Dimension.L: "historical_load",
}
CANDIDATE_DIMENSIONS = (Dimension.G, Dimension.A, Dimension.I, Dimension.S)


@dataclass
class FeatureSeries:
    name: str
    dimension: Dimension
    unit: str
    cadence: str
    dates: pd.DatetimeIndex
    values: np.ndarray

    def __post_init__(self):
        self.dimension = Dimension.parse(self.dimension)
        self.dates = pd.DatetimeIndex(self.dates)
        self.values = np.asarray(self.values, dtype=float)
        if not self.unit:
            raise ValidationError(f"{self.name}: unit must be non-empty")
        if self.cadence not in ("daily", "monthly"):
            raise ValidationError(f"{self.name}: cadence must be 'daily' or 'monthly'")
        if len(self.dates) != len(self.values):
            raise ValidationError(f"{self.name}: dates and values differ in length")
        if len(self.dates) > 1 and not (np.diff(day_numbers(self.dates)) > 0).all():
            raise ValidationError(f"{self.name}: non-monotone dates")
        if self.cadence == "monthly" and not (self.dates.day == 1).all():
            raise ValidationError(f"{self.name}: monthly values must sit on day 1 of each month")

    def to_series(self) -> pd.Series:
        return pd.Series(self.values, index=self.dates, name=self.name)


def day_numbers(index) -> np.ndarray:
    """Integer day count since the epoch for each date."""
    return np.asarray(pd.DatetimeIndex(index).values.astype("datetime64[D]").astype(np.int64))


def _parse_value(cell: str) -> float:
    text = cell.strip()
    if text.lower() in MISSING_MARKERS:
        return math.nan
    try:
        return float(text)
    except ValueError:
        return math.nan


def read_feature_csv(path: str | Path) -> tuple[pd.DatetimeIndex, np.ndarray]:
    """Read one ``date,value`` file.  Leading ``#`` lines are comments."""
    path = Path(path)
    dates: list[date] = []
    values: list[float] = []
    header_seen = False
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (row[0].startswith("#") and not header_seen):
                continue
            if not header_seen:
                if [c.strip().lower() for c in row[:2]] != ["date", "value"]:
                    raise ValidationError(f"{path}:{lineno}: expected header 'date,value'")
                header_seen = True
                continue
            try:
                d = date.fromisoformat(row[0].strip())
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: bad ISO date {row[0]!r}") from None
            if dates and d <= dates[-1]:
                raise ValidationError(f"{path}:{lineno}: non-monotone dates")
            dates.append(d)
            values.append(_parse_value(row[1] if len(row) > 1 else ""))
    if not header_seen:
        raise ValidationError(f"{path}: missing header")
    return pd.DatetimeIndex(pd.to_datetime(dates)), np.asarray(values, dtype=float)


def load_manifest(manifest: str | Path) -> list[dict]:
    manifest = Path(manifest)
    if not manifest.is_file():
        raise ValidationError(f"manifest not found: {manifest}")
    entries = json.loads(manifest.read_text(encoding="utf-8"))
    if not isinstance(entries, list):
        raise ValidationError(f"{manifest}: manifest must be a JSON array")
    required = {"file", "name", "dimension", "unit", "cadence"}
    for i, entry in enumerate(entries):
        missing = required - set(entry)
        if missing:
            raise ValidationError(f"{manifest}: entry {i} lacks {sorted(missing)}")
    return entries


def ingest(path: str | Path, manifest: str | Path) -> list[FeatureSeries]:
    """Parse every file listed in ``manifest`` (paths relative to ``path``)."""
    base = Path(path)
    seen: set[str] = set()
    out = []
    for i, entry in enumerate(load_manifest(manifest)):
        name = entry["name"]
        where = f"{manifest}: entry {i} ({entry['file']})"
        if name in seen:
            raise ValidationError(f"{where}: duplicate feature name {name!r}")
        seen.add(name)
        try:
            dim = Dimension.parse(entry["dimension"])
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from None
        file = base / entry["file"]
        if not file.is_file():
            raise ValidationError(f"{where}: file not found")
        dates, values = read_feature_csv(file)
        try:
            out.append(FeatureSeries(name, dim, entry["unit"], entry["cadence"], dates, values))
        except ValidationError as exc:
            raise ValidationError(f"{file}: {exc}") from None
    return out


def monthly_to_daily(series: FeatureSeries, end: date | pd.Timestamp | None = None) -> FeatureSeries:
    """Linear interpolation between day-1 month anchors.

    Days after the last anchor hold its value up to ``end`` (default: the last
    day of the last anchor's month).  Missing anchors are skipped.
    """
    if series.cadence != "monthly":
        raise ValidationError(f"{series.name}: cadence is {series.cadence}, expected monthly")
    observed = ~np.isnan(series.values)
    anchors = series.dates[observed]
    vals = series.values[observed]
    if len(anchors) < 2:
        raise ValidationError(f"{series.name}: cannot interpolate from fewer than 2 months")
    last = anchors[-1]
    end = pd.Timestamp(end) if end is not None else last + pd.offsets.MonthEnd(0)
    days = pd.date_range(anchors[0], max(end, last), freq="D")
    x = day_numbers(days)
    xp = day_numbers(anchors)
    daily = np.interp(x, xp, vals)
    daily[np.searchsorted(x, xp)] = vals
    return FeatureSeries(series.name, series.dimension, series.unit, "daily", days, daily)


@dataclass
class FeatureTable:
    """Date-indexed feature matrix with one dimension tag per column.

    ``frame`` holds every column including the target; rows are dates.
    """

    frame: pd.DataFrame
    dimensions: dict[str, Dimension]
    target: str
    units: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.frame = self.frame.astype(float)
        self.frame.index = pd.DatetimeIndex(self.frame.index, name="date")
        self.dimensions = {k: Dimension.parse(v) for k, v in self.dimensions.items()}
        cols = list(self.frame.columns)
        if len(set(cols)) != len(cols):
            raise ValidationError("duplicate column names")
        missing = [c for c in cols if c not in self.dimensions]
        if missing:
            raise ValidationError(f"columns without dimension tag: {missing}")
        if self.target not in cols:
            raise ValidationError(f"target {self.target!r} not in table")
        if self.dimensions[self.target] is not Dimension.L:
            raise ValidationError("target must have dimension L")

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.frame.index

    @property
    def feature_names(self) -> list[str]:
        return [c for c in self.frame.columns if c != self.target]

    @property
    def X(self) -> pd.DataFrame:
        return self.frame[self.feature_names]

    @property
    def y(self) -> pd.Series:
        return self.frame[self.target]

    def __len__(self) -> int:
        return len(self.frame)

    def is_complete(self) -> bool:
        return not self.frame.isna().any().any()

    def names_in(self, *dims: Dimension) -> list[str]:
        wanted = {Dimension.parse(d) for d in dims}
        return [c for c in self.feature_names if self.dimensions[c] in wanted]

    def _derive(self, frame: pd.DataFrame, dimensions: dict | None = None) -> "FeatureTable":
        dims = dimensions if dimensions is not None else self.dimensions
        dims = {c: dims[c] for c in frame.columns}
        units = {c: self.units.get(c, "") for c in frame.columns}
        return FeatureTable(frame, dims, self.target, units)

    def select(self, names: Sequence[str]) -> "FeatureTable":
        unknown = [n for n in names if n not in self.frame.columns]
        if unknown:
            raise ValidationError(f"unknown feature names: {unknown}")
        cols = [n for n in names if n != self.target] + [self.target]
        return self._derive(self.frame[cols])

    def rows(self, mask) -> "FeatureTable":
        return self._derive(self.frame.loc[mask])

    def with_columns(self, new: pd.DataFrame, dimensions: dict[str, Dimension], units: dict[str, str] | None = None) -> "FeatureTable":
        clash = [c for c in new.columns if c in self.frame.columns]
        if clash:
            raise ValidationError(f"columns already present: {clash}")
        frame = pd.concat([self.frame, new], axis=1)
        dims = {**self.dimensions, **dimensions}
        table = self._derive(frame, dims)
        if units:
            table.units.update(units)
        return table

    def to_csv(self, path: str | Path, header: str | None = None, provenance: dict | None = None) -> None:
        """Write ``<path>`` (wide CSV) and ``<stem>.meta.json``; ``provenance`` is copied into the sidecar."""
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if header:
                fh.write(header)
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["date"] + [f"{self.dimensions[c].value}:{c}" for c in self.frame.columns])
            for ts, row in zip(self.frame.index, self.frame.to_numpy()):
                writer.writerow([ts.date().isoformat()] + ["" if np.isnan(v) else repr(float(v)) for v in row])
        meta = {
            "target": self.target,
            "columns": [
                {"name": c, "dimension": self.dimensions[c].value, "unit": self.units.get(c, "")}
                for c in self.frame.columns
            ],
        }
        if provenance:
            meta["provenance"] = provenance
        meta_path = sidecar_path(path)
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def from_csv(cls, path: str | Path) -> "FeatureTable":
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"store not found: {path}")
        meta_path = sidecar_path(path)
        meta = json.loads(meta_path.read_text(encoding="utf-8")) if meta_path.is_file() else {}
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        header, body = rows[0], rows[1:]
        names, dims = [], {}
        for col in header[1:]:
            tag, _, name = col.partition(":")
            names.append(name)
            dims[name] = Dimension.parse(tag)
        index = pd.DatetimeIndex([pd.Timestamp(r[0]) for r in body], name="date")
        data = np.array([[_parse_value(c) for c in r[1:]] for r in body], dtype=float).reshape(len(body), len(names))
        target = meta.get("target") or next(n for n in names if dims[n] is Dimension.L)
        units = {c["name"]: c.get("unit", "") for c in meta.get("columns", [])}
        return cls(pd.DataFrame(data, index=index, columns=names), dims, target, units)


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name[: -len(path.suffix)] + ".meta.json") if path.suffix else path.with_name(path.name + ".meta.json")


def assemble(
    series: Iterable[FeatureSeries],
    target: str | None = None,
    start=None,
    end=None,
) -> FeatureTable:
    """Align series to one daily calendar; monthly series are interpolated.

    The calendar defaults to the target's first and last date.  Cells without
    data are left missing for :func:`impute`.
    """
    series = list(series)
    if not series:
        raise ValidationError("no series to assemble")
    by_name = {s.name: s for s in series}
    if target is None:
        loads = [s.name for s in series if s.dimension is Dimension.L]
        if len(loads) != 1:
            raise ValidationError(f"expected exactly one L-dimension series as target, found {loads}")
        target = loads[0]
    if target not in by_name:
        raise ValidationError(f"target {target!r} not among series")
    tgt = by_name[target]
    start = pd.Timestamp(start) if start is not None else tgt.dates[0]
    end = pd.Timestamp(end) if end is not None else tgt.dates[-1]
    calendar = pd.date_range(start, end, freq="D", name="date")
    columns = {}
    for s in series:
        daily = monthly_to_daily(s, end=end) if s.cadence == "monthly" else s
        columns[s.name] = daily.to_series().reindex(calendar)
    ordered = [n for n in by_name if n != target] + [target]
    frame = pd.DataFrame({n: columns[n] for n in ordered}, index=calendar)
    dims = {s.name: s.dimension for s in series}
    units = {s.name: s.unit for s in series}
    return FeatureTable(frame, dims, target, units)


def _bayes_ridge_draw(X: np.ndarray, y: np.ndarray, X_new: np.ndarray, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Posterior-predictive draw from a ridge regression with a flat noise prior."""
    mu, sd = X.mean(axis=0), X.std(axis=0)
    keep = sd > 0
    Z = (X[:, keep] - mu[keep]) / sd[keep]
    Z_new = (X_new[:, keep] - mu[keep]) / sd[keep]
    y_mean = y.mean()
    yc = y - y_mean
    n, p = Z.shape
    gram = Z.T @ Z + alpha * np.eye(p)
    chol = np.linalg.cholesky(gram)
    beta = np.linalg.solve(gram, Z.T @ yc)
    resid = yc - Z @ beta
    dof = max(n - p, 1)
    sigma2 = float(resid @ resid) / rng.chisquare(dof)
    # beta ~ N(beta_hat, sigma2 * gram^-1): solve L^T b = z
    beta_draw = beta + math.sqrt(sigma2) * np.linalg.solve(chol.T, rng.standard_normal(p))
    return y_mean + Z_new @ beta_draw + math.sqrt(sigma2) * rng.standard_normal(len(Z_new))


class ChainedImputer(TransformerMixin, BaseEstimator):
    """Chained-equation multiple imputation averaged over seeded chains.

    Each incomplete column is regressed on every other column with a ridge
    model, and the missing cells are replaced by a posterior-predictive draw.
    ``rounds`` sweeps run per chain; the result is the mean over ``n_chains``
    chains.  Observed cells are never modified.

    Parameters
    ----------
    rounds : int, default=5
    n_chains : int, default=5
    alpha : float, default=1e-6
        Ridge penalty on standardized predictors.
    min_observed : float, default=0.3
        Minimum observed fraction per column.
    seed : int, default=0
    """

    def __init__(self, rounds=5, n_chains=5, alpha=1e-6, min_observed=0.3, seed=0):
        self.rounds = rounds
        self.n_chains = n_chains
        self.alpha = alpha
        self.min_observed = min_observed
        self.seed = seed

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=float)
        observed = ~np.isnan(X)
        frac = observed.mean(axis=0) if len(X) else np.ones(X.shape[1])
        low = np.flatnonzero(frac < self.min_observed)
        if low.size:
            names = [self._name(j) for j in low]
            raise ValidationError(f"column(s) below observed-fraction floor {self.min_observed}: {names}")
        self.n_features_in_ = X.shape[1]
        return self

    def _name(self, j: int) -> str:
        names = getattr(self, "feature_names_", None)
        return names[j] if names is not None else f"column {j}"

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = np.asarray(X, dtype=float)
        missing = np.isnan(X)
        if not missing.any():
            return X.copy()
        # visit columns from least to most missing, ties by position
        order = sorted(np.flatnonzero(missing.any(axis=0)), key=lambda j: (missing[:, j].sum(), j))
        chains = np.random.SeedSequence(self.seed).spawn(self.n_chains)
        total = np.zeros_like(X)
        for seq in chains:
            rng = np.random.default_rng(seq)
            filled = X.copy()
            col_means = np.nanmean(X, axis=0)
            filled[missing] = np.take(col_means, np.nonzero(missing)[1])
            for _ in range(self.rounds):
                for j in order:
                    obs = ~missing[:, j]
                    vals = X[obs, j]
                    if np.all(vals == vals[0]):
                        filled[~obs, j] = vals[0]
                        continue
                    others = np.delete(filled, j, axis=1)
                    filled[~obs, j] = _bayes_ridge_draw(others[obs], vals, others[~obs], self.alpha, rng)
            total += filled
        out = total / self.n_chains
        out[~missing] = X[~missing]
        return out


def impute(table: FeatureTable, rounds: int = 5, seed: int = 0, n_chains: int = 5, min_observed: float = 0.3) -> FeatureTable:
    """Fill missing cells with :class:`ChainedImputer`.  The target must be fully observed."""
    if table.y.isna().any():
        raise ValidationError(f"target {table.target!r} has missing values")
    if table.is_complete():
        return table
    imp = ChainedImputer(rounds=rounds, n_chains=n_chains, min_observed=min_observed, seed=seed)
    imp.feature_names_ = list(table.frame.columns)
    values = imp.fit_transform(table.frame.to_numpy())
    frame = pd.DataFrame(values, index=table.frame.index, columns=table.frame.columns)
    return FeatureTable(frame, dict(table.dimensions), table.target, dict(table.units))


def add_lag_features(table: FeatureTable, source: str, lags: Sequence[int]) -> FeatureTable:
    """Append ``<source>_lag_<k>`` columns and drop the first ``max(lags)`` rows."""
    if source not in table.frame.columns:
        raise ValidationError(f"unknown source feature {source!r}")
    lags = list(lags)
    if not lags:
        return table
    if any(int(k) != k or k < 1 for k in lags):
        raise ValidationError("lags must be positive integers")
    if max(lags) >= len(table):
        raise ValidationError(f"lag {max(lags)} >= series length {len(table)}")
    col = table.frame[source]
    new = pd.DataFrame({f"{source}_lag_{k}": col.shift(k) for k in lags}, index=table.frame.index)
    dim = table.dimensions[source]
    unit = table.units.get(source, "")
    out = table.with_columns(
        new, {c: dim for c in new.columns}, {c: unit for c in new.columns}
    )
    return out.rows(out.frame.index[max(lags):])


def add_date_features(table: FeatureTable) -> FeatureTable:
    """Date coefficient: day-of-week one-hot plus day-of-year sine/cosine (dimension S)."""
    idx = table.dates
    dow = idx.dayofweek.to_numpy()
    cols = {f"dow_{i}": (dow == i).astype(float) for i in range(7)}
    phase = 2 * np.pi * idx.dayofyear.to_numpy() / 365.25
    cols["doy_sin"] = np.sin(phase)
    cols["doy_cos"] = np.cos(phase)
    new = pd.DataFrame(cols, index=idx)
    return table.with_columns(new, {c: Dimension.S for c in new.columns}, {c: "1" for c in new.columns})


def _as_range(r) -> tuple[pd.Timestamp, pd.Timestamp]:
    lo, hi = (pd.Timestamp(v) for v in r)
    if hi < lo:
        raise ValidationError(f"date range end {hi.date()} precedes start {lo.date()}")
    return lo, hi


def split(table: FeatureTable, train, test) -> tuple[FeatureTable, FeatureTable]:
    """Partition rows into inclusive ``(start, end)`` date ranges."""
    tr, te = _as_range(train), _as_range(test)
    if te[0] <= tr[1]:
        raise ValidationError("test range must start after the train range ends")
    d = table.dates
    tr_mask = (d >= tr[0]) & (d <= tr[1])
    te_mask = (d >= te[0]) & (d <= te[1])
    if not tr_mask.any():
        raise ValidationError("empty train")
    if not te_mask.any():
        raise ValidationError("empty test")
    return table.rows(tr_mask), table.rows(te_mask)


@dataclass(frozen=True)
class SchemeSpec:
    id: str
    included: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "included", tuple(self.included))


def build_scheme(table: FeatureTable, spec: SchemeSpec) -> FeatureTable:
    """Column subset for a scheme; the target and date index are kept."""
    return table.select(list(spec.included))
