"""Fit every (scheme, model) pair on a train range and score it on the test range."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .. import plotting
from ..stdb import FeatureTable, SchemeSpec, build_scheme, split
from . import ModelSpec, fit
from .metrics import Metrics, evaluate


@dataclass
class ComparisonReport:
    rows: list[dict]  # scheme, model, mape, rmse, mae, n, n_features
    schemes: list[str]
    models: list[str]

    def metric(self, scheme: str, model: str) -> Metrics:
        for r in self.rows:
            if r["scheme"] == scheme and r["model"] == model:
                return Metrics(r["mape"], r["rmse"], r["mae"], r["n"])
        raise KeyError((scheme, model))

    def relative_mape(self, scheme: str, model: str, reference: str) -> float:
        """Percent change of MAPE against ``reference`` (negative means better)."""
        ref = self.metric(reference, model).mape
        return 100.0 * (self.metric(scheme, model).mape - ref) / ref

    def best_other(self, model: str, exclude: str = "S5") -> str:
        candidates = [s for s in self.schemes if s != exclude]
        return min(candidates, key=lambda s: (self.metric(s, model).mape, s))

    def to_csv(self, path, header: str = "") -> None:
        base = self.schemes[0]
        has_s5 = "S5" in self.schemes and len(self.schemes) > 1
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(header)
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["scheme", "model", "n_features", "n", "mape", "rmse", "mae",
                        f"mape_delta_vs_{base}_pct", "mape_delta_vs_best_non_S5_pct"])
            for r in self.rows:
                vs_base = self.relative_mape(r["scheme"], r["model"], base)
                vs_best = self.relative_mape(r["scheme"], r["model"], self.best_other(r["model"])) if has_s5 else float("nan")
                w.writerow([r["scheme"], r["model"], r["n_features"], r["n"],
                            repr(r["mape"]), repr(r["rmse"]), repr(r["mae"]), repr(vs_base), repr(vs_best)])

    def to_svg(self, header: str = "") -> str:
        series = {m: [self.metric(s, m).mape for s in self.schemes] for m in self.models}
        return plotting.grouped_bar_chart(self.schemes, series, "Test MAPE by feature scheme", "MAPE (%)", header)


def compare_schemes(
    table: FeatureTable,
    schemes: Sequence[SchemeSpec],
    specs: Sequence[ModelSpec],
    train_range,
    test_range,
    threads: int = 1,
) -> ComparisonReport:
    jobs = []
    for scheme in schemes:
        sub = build_scheme(table, scheme)
        train, test = split(sub, train_range, test_range)
        for spec in specs:
            jobs.append((scheme, spec, train, test))

    def run(job):
        scheme, spec, train, test = job
        model = fit(spec, train)
        m = evaluate(test.y.to_numpy(), model.predict(test))
        return {"scheme": scheme.id, "model": spec.kind, "n_features": len(train.feature_names), **m.as_dict()}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(j) for j in jobs]
    return ComparisonReport(rows, [s.id for s in schemes], [s.kind for s in specs])
