"""Command-line entry point.

Usage::

    loadscope [--config FILE] [--set key.path=value ...] [--out DIR] [--seed N] [--threads N] GROUP ACTION

Exit codes: 0 success, 1 invalid input, 2 runtime failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import os
import sys
import time
import warnings
from html import escape
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__, analyze, cluster, corpus, identify, stdb, synth
from ._validation import ValidationError
from .models import ModelSpec, fit
from .models.compare import compare_schemes

log = logging.getLogger("loadscope")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2, 64

COMMANDS = {
    "corpus": ("score", "cluster"),
    "db": ("synth", "ingest", "impute"),
    "identify": ("features", "dims"),
    "forecast": ("compare",),
    "analyze": ("sobol", "pdp", "lag"),
    "report": (),
    "pipeline": (),
}
PIPELINE = [
    ("corpus", "score"), ("corpus", "cluster"), ("db", "synth"), ("db", "ingest"), ("db", "impute"),
    ("identify", "features"), ("identify", "dims"), ("forecast", "compare"),
    ("analyze", "sobol"), ("analyze", "pdp"), ("analyze", "lag"), ("report", None),
]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config


def default_config() -> dict:
    return json.loads(resources.files("loadscope").joinpath("data/default_config.json").read_text("utf-8"))


def _merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in update.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> None:
    key, sep, value = assignment.partition("=")
    if not sep or not key:
        raise ValidationError(f"--set expects key.path=value, got {assignment!r}")
    parts = key.split(".")
    node = cfg
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            raise ValidationError(f"--set {key}: {p!r} is not a config section")
        node = node[p]
    node[parts[-1]] = _parse_value(value)


def load_config(path: str | None, overrides=(), out: str | None = None, seed: int | None = None) -> dict:
    cfg = default_config()
    if path:
        p = Path(path)
        if not p.is_file():
            raise ValidationError(f"config: file not found: {p}")
        try:
            user = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config: {p}: {exc}") from None
        if not isinstance(user, dict):
            raise ValidationError("config: top level must be a JSON object")
        cfg = _merge(cfg, user)
    for o in overrides:
        apply_override(cfg, o)
    if out is not None:
        cfg["out_dir"] = out
    if seed is not None:
        cfg["seed"] = seed
    if not isinstance(cfg.get("seed"), int):
        raise ValidationError("config: seed is mandatory and must be an integer")
    return cfg


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()[:16]


class Run:
    """Resolved configuration plus the provenance header shared by every artifact."""

    def __init__(self, cfg: dict, threads: int = 1):
        self.cfg = cfg
        self.seed = int(cfg["seed"])
        self.threads = max(1, int(threads))
        self.out = Path(cfg["out_dir"])
        self.hash = config_hash(cfg)
        self.artifacts: list[str] = []

    def path(self, key: str) -> Path:
        section, _, name = key.partition(".")
        value = self.cfg.get(section, {}).get(name)
        if not value:
            raise ValidationError(f"config key {key} is not set")
        return Path(str(value).replace("{out}", str(self.out)))

    def thresholds(self) -> str:
        c = self.cfg
        return (f"dcw_threshold={c['corpus']['dcw_threshold']} variance_threshold={c['identify']['variance_threshold']} "
                f"kbest_threshold={c['identify']['kbest_threshold']} k={c['identify']['k']}")

    def header_text(self) -> str:
        return f"loadscope {__version__} config_hash={self.hash} seed={self.seed} {self.thresholds()}"

    @property
    def header(self) -> str:
        return f"# {self.header_text()}\n"

    def provenance(self) -> dict:
        c = self.cfg
        return {"tool": f"loadscope {__version__}", "config_hash": self.hash, "seed": self.seed,
                "thresholds": {"dcw": c["corpus"]["dcw_threshold"], "variance": c["identify"]["variance_threshold"],
                               "kbest": c["identify"]["kbest_threshold"], "k": c["identify"]["k"]}}

    def dir(self, *parts) -> Path:
        d = self.out.joinpath(*parts)
        d.mkdir(parents=True, exist_ok=True)
        return d

    def wrote(self, *paths) -> None:
        self.artifacts.extend(str(p) for p in paths)

    def write_text(self, path: Path, text: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.wrote(path)

    def write_json(self, path: Path, obj: dict) -> None:
        self.write_text(path, json.dumps({"provenance": self.provenance(), **obj}, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- shared loaders


def _model_spec(d: dict, where: str) -> ModelSpec:
    if not isinstance(d, dict):
        raise ValidationError(f"{where}: expected a model spec object")
    try:
        return ModelSpec.from_dict(d)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def _load_table(run: Run) -> stdb.FeatureTable:
    path = run.path("store.table")
    if not path.is_file():
        raise ValidationError(f"store.table: {path} not found; run `db impute` first")
    return stdb.FeatureTable.from_csv(path)


def _date_and_lag_columns(table: stdb.FeatureTable) -> list[str]:
    return [c for c in table.feature_names
            if table.dimensions[c] is stdb.Dimension.L or c in stdb.DATE_FEATURES]


def _identified(run: Run, table: stdb.FeatureTable) -> list[str]:
    path = run.out / "identify" / "identified_counts.json"
    if path.is_file():
        return list(json.loads(path.read_text(encoding="utf-8"))["selected"])
    return _lvkb(run, table).selected


def _lvkb(run: Run, table: stdb.FeatureTable) -> identify.LVKBResult:
    c = run.cfg["identify"]
    candidates = table.select([n for n in table.feature_names if n not in stdb.DATE_FEATURES])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return identify.lvkb(candidates, float(c["variance_threshold"]), float(c["kbest_threshold"]), c.get("k"))


def _train(run: Run, table: stdb.FeatureTable) -> tuple[stdb.FeatureTable, stdb.FeatureTable]:
    s = run.cfg["split"]
    return stdb.split(table, s["train"], s["test"])


# ---------------------------------------------------------------- corpus


def _ranking(run: Run):
    c = run.cfg["corpus"]
    stop = corpus.default_stopwords()
    if c.get("stopwords"):
        p = Path(c["stopwords"])
        if not p.is_file():
            raise ValidationError(f"corpus.stopwords: file not found: {p}")
        stop = corpus.load_stopwords_text(p.read_text(encoding="utf-8"))
    directory = c.get("dir") or resources.files("loadscope").joinpath("data/corpus")
    if c.get("dir") and not Path(c["dir"]).is_dir():
        raise ValidationError(f"corpus.dir: directory not found: {c['dir']}")
    docs = corpus.read_corpus(directory, stop)
    stats = corpus.build_stats(docs, int(c["window_size"]))
    return stats, corpus.rank_features(stats, c["anchor"], float(c["dcw_threshold"]))


def cmd_corpus_score(run: Run) -> None:
    _, ranking = _ranking(run)
    path = run.dir("corpus") / "dcw_ranking.csv"
    ranking.to_csv(path, run.header)
    run.wrote(path)
    log.info("%d words scored, %d kept, %d omitted", len(ranking.entries), len(ranking.kept_words), ranking.omitted)


def cmd_corpus_cluster(run: Run) -> None:
    c = run.cfg["cluster"]
    stats, ranking = _ranking(run)
    words = ranking.kept_words
    if not words:
        raise ValidationError("no words passed the DCW threshold; nothing to cluster")
    mat = corpus.ppmi_matrix(stats)
    X = np.vstack([mat[stats.index(w)] for w in words])
    km = cluster.SeededKMeans(int(c["k"]), run.seed, int(c["max_iter"]), int(c["n_init"])).fit(X)
    lexicon = cluster.default_lexicon()
    if c.get("lexicon"):
        p = Path(c["lexicon"])
        if not p.is_file():
            raise ValidationError(f"cluster.lexicon: file not found: {p}")
        lexicon = {k: set(v) for k, v in json.loads(p.read_text(encoding="utf-8")).items()}
    dims = cluster.assign_dimensions(km.labels_, words, lexicon)
    path = run.dir("corpus") / "clusters.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(run.header)
        fh.write(f"# objective={km.inertia_!r} iterations={km.n_iter_}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["word", "cluster", "dimension"])
        for word, label in sorted(zip(words, km.labels_), key=lambda t: (int(t[1]), t[0])):
            w.writerow([word, int(label), dims[word]])
    run.wrote(path)


# ---------------------------------------------------------------- db


def cmd_db_synth(run: Run) -> None:
    out = run.path("store.manifest").parent
    cfg = synth.SynthConfig.from_dict(run.cfg["synth"])
    result = synth.write_synth(out, cfg, run.seed, run.header, run.provenance())
    run.wrote(out / "manifest.json", out / "ground_truth.json", *(out / "data" / f"{s.name}.csv" for s in result.series))


def cmd_db_ingest(run: Run) -> None:
    manifest = run.path("store.manifest")
    if not manifest.is_file():
        raise ValidationError(f"store.manifest: file not found: {manifest}")
    series = stdb.ingest(manifest.parent, manifest)
    table = stdb.assemble(series, run.cfg["store"].get("target"))
    path = run.path("store.raw")
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, run.header, run.provenance())
    run.wrote(path, stdb.sidecar_path(path))
    log.info("assembled %d days x %d columns, %d missing cells", len(table), table.frame.shape[1],
             int(table.frame.isna().sum().sum()))


def cmd_db_impute(run: Run) -> None:
    raw = run.path("store.raw")
    if not raw.is_file():
        raise ValidationError(f"store.raw: {raw} not found; run `db ingest` first")
    c, s = run.cfg["impute"], run.cfg["store"]
    table = stdb.impute(stdb.FeatureTable.from_csv(raw), int(c["rounds"]), run.seed, int(c["chains"]),
                        float(c["min_observed"]))
    n_lags = int(s.get("load_lags", 0))
    if n_lags:
        table = stdb.add_lag_features(table, table.target, range(1, n_lags + 1))
    if s.get("date_features", True):
        table = stdb.add_date_features(table)
    path = run.path("store.table")
    table.to_csv(path, run.header, run.provenance())
    run.wrote(path, stdb.sidecar_path(path))


# ---------------------------------------------------------------- identify


def cmd_identify_features(run: Run) -> None:
    table = _load_table(run)
    result = _lvkb(run, table)
    if not result.selected:
        log.warning("identified feature set is empty")
    d = run.dir("identify")
    result.scores_to_csv(d / "feature_scores.csv", run.header)
    run.write_json(d / "identified_counts.json", {
        "variance_threshold": result.variance_threshold, "kbest_threshold": result.kbest_threshold,
        "k": result.k, "counts": result.counts, "total": len(result.selected), "selected": result.selected,
    })
    run.wrote(d / "feature_scores.csv")


def cmd_identify_dims(run: Run) -> None:
    c = run.cfg["identify"]
    table = _load_table(run)
    dims = [stdb.Dimension.G, stdb.Dimension.A, stdb.Dimension.I, stdb.Dimension.S]
    if c.get("include_load_group"):
        dims.append(stdb.Dimension.L)
    sub = table.select(table.names_in(*dims))
    train, _ = _train(run, sub)
    model = fit(_model_spec(c["model"], "identify.model"), train)
    attr = identify.grouped_shapley(model, train, int(c["shapley_samples"]), run.seed)
    d = run.dir("identify")
    attr.to_csv(d / "dimension_attribution.csv", run.header)
    run.wrote(d / "dimension_attribution.csv")
    run.write_json(d / "dimension_summary.json", {
        "baseline": attr.baseline, "mean_abs": attr.mean_abs, "sign_summary": attr.sign_summary,
        "ranking": attr.ranking(), "efficiency_error": attr.efficiency_error(),
        "n_samples": len(attr.values), "model": c["model"],
    })
    # colour each point by the sample's dimension aggregate value
    agg = analyze.dimension_aggregate(train.select([n for n in train.feature_names
                                                    if np.ptp(train.frame[n].to_numpy()) > 0]),
                                      [stdb.Dimension.parse(x) for x in attr.dimensions])
    rows = [train.dates.get_loc(pd.Timestamp(x)) for x in attr.dates]
    fv = agg.frame[attr.dimensions].to_numpy()[rows]
    paths = analyze.beeswarm_export(attr, d, fv, run.seed, run.header)
    run.wrote(*paths)


# ---------------------------------------------------------------- forecast


def build_schemes(run: Run, table: stdb.FeatureTable) -> list[stdb.SchemeSpec]:
    base = _date_and_lag_columns(table)
    schemes = [stdb.SchemeSpec("S1", base)]
    included = list(base)
    for sid, extra in sorted(run.cfg.get("schemes", {}).items()):
        unknown = [n for n in extra if n not in table.frame.columns]
        if unknown:
            raise ValidationError(f"schemes.{sid}: unknown features {unknown}")
        included = included + [n for n in extra if n not in included]
        schemes.append(stdb.SchemeSpec(sid, included))
    identified = [n for n in _identified(run, table) if n not in base]
    s5 = stdb.SchemeSpec("S5", base + identified)
    missing = [n for n in included if n not in s5.included]
    if missing:
        log.warning("scheme nesting broken: S5 lacks %s", missing)
    schemes.append(s5)
    return schemes


def cmd_forecast_compare(run: Run) -> None:
    table = _load_table(run)
    schemes = build_schemes(run, table)
    specs = [_model_spec(m, f"models[{i}]") for i, m in enumerate(run.cfg["models"])]
    s = run.cfg["split"]
    report = compare_schemes(table, schemes, specs, s["train"], s["test"], run.threads)
    d = run.dir("forecast")
    report.to_csv(d / "comparison.csv", run.header)
    run.wrote(d / "comparison.csv")
    run.write_text(d / "comparison.svg", report.to_svg(run.header_text()))
    run.write_json(d / "schemes.json", {"schemes": {sc.id: list(sc.included) for sc in schemes}})


# ---------------------------------------------------------------- analyze


def _s5_train(run: Run) -> stdb.FeatureTable:
    table = _load_table(run)
    cols = _date_and_lag_columns(table) + [n for n in _identified(run, table) if n not in stdb.DATE_FEATURES]
    train, _ = _train(run, table.select(cols))
    return train


def cmd_analyze_sobol(run: Run) -> None:
    c = run.cfg["sobol"]
    table = _load_table(run)
    identified = [n for n in _identified(run, table) if table.dimensions[n] is not stdb.Dimension.L]
    present = {table.dimensions[n] for n in identified}
    dims = [d for d in analyze.AGGREGATE_DIMENSIONS if d in present]
    if not dims:
        raise ValidationError("no identified features outside the load dimension")
    train, _ = _train(run, table.select(identified))
    agg = analyze.dimension_aggregate(train, dims)
    model = fit(_model_spec(c["model"], "sobol.model"), agg)
    names = [d.value for d in dims]
    rep = analyze.sobol_indices(model.predict, [[0.0, 1.0]] * len(dims), int(c["n"]), run.seed, names)
    d = run.dir("analyze")
    rep.to_csv(d / "sobol.csv", run.header + "# inputs: per-dimension mean of min-max normalized identified features\n")
    run.wrote(d / "sobol.csv")


def cmd_analyze_pdp(run: Run) -> None:
    c = run.cfg["pdp"]
    train = _s5_train(run)
    model = fit(_model_spec(c["model"], "pdp.model"), train)
    d = run.dir("analyze")
    for feature in c["features"]:
        if feature not in model.columns:
            raise ValidationError(f"pdp.features: {feature!r} is not in the identified set")
        curve = analyze.partial_dependence(model, train, feature, int(c["grid_size"]))
        curve.to_csv(d / f"pdp_{feature}.csv", run.header)
        run.wrote(d / f"pdp_{feature}.csv")
        run.write_text(d / f"pdp_{feature}.svg", curve.to_svg(run.header_text()))


def cmd_analyze_lag(run: Run) -> None:
    c = run.cfg["lag"]
    table = _load_table(run)
    y = table.y.to_numpy()
    reports = []
    for feature in c["features"]:
        if feature not in table.frame.columns:
            raise ValidationError(f"lag.features: unknown feature {feature!r}")
        reports.append(analyze.lag_correlation(table.frame[feature].to_numpy(), y, int(c["max_lag"]), feature))
    d = run.dir("analyze")
    analyze.write_lags_csv(reports, d / "lags.csv", run.header)
    run.wrote(d / "lags.csv")
    for r in reports:
        log.info("%s: best lag %d (r=%.3f)", r.feature, r.best_lag, r.best_r)


# ---------------------------------------------------------------- report


def _csv_table(path: Path, max_rows: int = 40) -> str:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        return ""
    head, body = rows[0], rows[1:]
    out = ["<table>", "<tr>" + "".join(f"<th>{escape(h)}</th>" for h in head) + "</tr>"]
    for r in body[:max_rows]:
        out.append("<tr>" + "".join(f"<td>{escape(_short(v))}</td>" for v in r) + "</tr>")
    out.append("</table>")
    if len(body) > max_rows:
        out.append(f"<p>{len(body) - max_rows} more rows in the CSV.</p>")
    return "\n".join(out)


def _short(v: str) -> str:
    try:
        f = float(v)
    except ValueError:
        return v
    return v if v.lstrip("-").isdigit() else f"{f:.6g}"


def _svg_body(path: Path) -> str:
    return "\n".join(line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("<!--"))


REPORT_SECTIONS = [
    ("Corpus: DCW ranking", ["corpus/dcw_ranking.csv"]),
    ("Corpus: clusters", ["corpus/clusters.csv"]),
    ("Dominant dimensions", ["identify/dimension_summary.json", "identify/beeswarm.svg"]),
    ("Dominant features", ["identify/identified_counts.json", "identify/feature_scores.csv"]),
    ("Feature scheme comparison", ["forecast/comparison.svg", "forecast/comparison.csv"]),
    ("Sobol sensitivity", ["analyze/sobol.csv"]),
    ("Partial dependence", ["analyze/pdp_*.svg"]),
    ("Lag correlation", ["analyze/lags.csv"]),
]


CAVEATS = (
    "Forecasts come from ridge, gradient-boosted trees and a one-layer MLP only; "
    "kernel, recurrent and attention models are not implemented.",
    "The bundled store is synthetic with a planted load function, so absolute error levels "
    "say nothing about real grids.",
    "Dimension aggregates for the Sobol run are row means of min-max scaled member features.",
    "Negative second-order Sobol values are estimator noise and are reported unclamped.",
)


def cmd_report(run: Run) -> None:
    parts = [
        "<!DOCTYPE html>", f"<!-- {escape(run.header_text())} -->",
        "<html><head><meta charset=\"utf-8\"><title>loadscope report</title>",
        "<style>body{font-family:sans-serif;max-width:980px;margin:auto}table{border-collapse:collapse;font-size:12px}"
        "td,th{border:1px solid #ccc;padding:2px 6px}pre{background:#f6f6f6;padding:6px}</style></head><body>",
        "<h1>loadscope report</h1>", f"<p><code>{escape(run.header_text())}</code></p>",
    ]
    found = 0
    for title, patterns in REPORT_SECTIONS:
        files = []
        for pat in patterns:
            files.extend(sorted(run.out.glob(pat)))
        if not files:
            continue
        parts.append(f"<h2>{escape(title)}</h2>")
        for f in files:
            rel = f.relative_to(run.out).as_posix()
            parts.append(f"<p><a href=\"../{escape(rel)}\">{escape(rel)}</a></p>")
            if f.suffix == ".svg":
                parts.append(_svg_body(f))
            elif f.suffix == ".csv":
                parts.append(_csv_table(f))
            elif f.suffix == ".json":
                doc = json.loads(f.read_text(encoding="utf-8"))
                doc.pop("provenance", None)
                parts.append(f"<pre>{escape(json.dumps(doc, indent=2, sort_keys=True))}</pre>")
            found += 1
    if not found:
        raise ValidationError(f"no artifacts under {run.out}; run the pipeline first")
    parts.append("<h2>Caveats</h2><ul>")
    parts.extend(f"<li>{escape(c)}</li>" for c in CAVEATS)
    parts.append("</ul></body></html>")
    run.write_text(run.dir("report") / "index.html", "\n".join(parts) + "\n")


HANDLERS = {
    ("corpus", "score"): cmd_corpus_score,
    ("corpus", "cluster"): cmd_corpus_cluster,
    ("db", "synth"): cmd_db_synth,
    ("db", "ingest"): cmd_db_ingest,
    ("db", "impute"): cmd_db_impute,
    ("identify", "features"): cmd_identify_features,
    ("identify", "dims"): cmd_identify_dims,
    ("forecast", "compare"): cmd_forecast_compare,
    ("analyze", "sobol"): cmd_analyze_sobol,
    ("analyze", "pdp"): cmd_analyze_pdp,
    ("analyze", "lag"): cmd_analyze_lag,
    ("report", None): cmd_report,
}


def cmd_pipeline(run: Run) -> None:
    for key in PIPELINE:
        log.info("== %s", " ".join(k for k in key if k))
        HANDLERS[key](run)


HANDLERS[("pipeline", None)] = cmd_pipeline


# ---------------------------------------------------------------- entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="loadscope", description="Feature discovery, identification and analysis for load forecasting.")
    p.add_argument("--config", help="JSON run configuration (defaults are bundled)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value, e.g. identify.kbest_threshold=5")
    p.add_argument("--out", help="output directory (overrides out_dir)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"loadscope {__version__}")
    p.add_argument("group", help=", ".join(COMMANDS))
    p.add_argument("action", nargs="?")
    return p


def _append_runlog(out: Path, record: dict) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "runlog.jsonl", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    except OSError as exc:  # never mask the command's own outcome
        log.warning("could not append to runlog: %s", exc)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        actions = COMMANDS.get(args.group)
        if actions is None or (actions and args.action not in actions) or (not actions and args.action):
            raise UsageError(f"unknown subcommand: {args.group} {args.action or ''}".strip())
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        print("subcommands: " + "; ".join(f"{g} {'|'.join(a)}".strip() for g, a in COMMANDS.items()), file=sys.stderr)
        return EXIT_USAGE

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    command = f"{args.group} {args.action}" if args.action else args.group
    started = time.time()
    run = None
    try:
        cfg = load_config(args.config, args.overrides, args.out, args.seed)
        run = Run(cfg, args.threads)
        HANDLERS[(args.group, args.action)](run)
        code = EXIT_OK
        message = "ok"
    except ValidationError as exc:
        code, message = EXIT_INVALID, str(exc)
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime error
        code, message = EXIT_RUNTIME, f"{type(exc).__name__}: {exc}"
        log.debug("traceback", exc_info=True)
    if code:
        print(f"error: {message}", file=sys.stderr)
    out = run.out if run else Path(args.out or default_config()["out_dir"])
    _append_runlog(out, {
        "time": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(started)),
        "seconds": round(time.time() - started, 3),
        "command": command, "exit": code, "message": message,
        "config_hash": run.hash if run else None, "seed": run.seed if run else args.seed,
        "artifacts": run.artifacts if run else [],
    })
    return code


if __name__ == "__main__":
    sys.exit(main())
