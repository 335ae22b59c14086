import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loadscope import analyze, models
from loadscope._validation import ValidationError
from loadscope.stdb import FeatureTable


def _table(cols: dict, dims: dict, y):
    frame = pd.DataFrame(cols, index=pd.date_range("2020-01-01", periods=len(y)))
    frame["load"] = y
    return FeatureTable(frame, {**dims, "load": "L"}, "load")


class LinearModel:
    def __init__(self, columns, coef, intercept=0.0):
        self.columns = list(columns)
        self.coef = np.asarray(coef, float)
        self.intercept = intercept

    def predict(self, X):
        return np.asarray(X, float) @ self.coef + self.intercept


# ---------------------------------------------------------------- aggregation


def test_aggregate_singletons_and_duplicates():
    rng = np.random.default_rng(0)
    a = rng.uniform(2, 5, 20)
    cols = {"g": a, "g2": a.copy(), "a": rng.normal(size=20), "i": rng.normal(size=20), "s": rng.normal(size=20)}
    t = _table(cols, {"g": "G", "g2": "G", "a": "A", "i": "I", "s": "S"}, rng.normal(size=20) + 10)
    agg = analyze.dimension_aggregate(t)
    assert agg.feature_names == ["G", "A", "I", "S"]
    np.testing.assert_allclose(agg.frame["G"], (a - a.min()) / np.ptp(a), atol=1e-15)
    s = cols["s"]
    np.testing.assert_allclose(agg.frame["S"], (s - s.min()) / np.ptp(s), atol=1e-15)


def test_aggregate_errors():
    rng = np.random.default_rng(1)
    cols = {"g": rng.normal(size=10), "a": rng.normal(size=10), "i": rng.normal(size=10), "s": np.ones(10)}
    t = _table(cols, {"g": "G", "a": "A", "i": "I", "s": "S"}, rng.normal(size=10))
    with pytest.raises(ValidationError, match="zero range in min-max"):
        analyze.dimension_aggregate(t)
    t2 = _table({"g": rng.normal(size=10)}, {"g": "G"}, rng.normal(size=10))
    with pytest.raises(ValidationError, match="no features"):
        analyze.dimension_aggregate(t2)


# ---------------------------------------------------------------- Sobol


def test_sobol_additive_model():
    rep = analyze.sobol_indices(lambda X: X[:, 0] + X[:, 1], [[0, 1], [0, 1]], n=1000, seed=0)
    np.testing.assert_allclose(rep.S1, 0.5, atol=0.03)
    np.testing.assert_allclose(rep.ST, rep.S1, atol=0.03)
    assert abs(rep.S2[0, 1]) <= 0.03
    assert 0.95 <= rep.S1.sum() <= 1.05


@settings(max_examples=10, deadline=None)
@given(st.lists(st.floats(0.2, 5.0), min_size=2, max_size=4), st.integers(0, 1000))
def test_sobol_additive_properties(weights, seed):
    w = np.array(weights)
    rep = analyze.sobol_indices(lambda X: X @ w, [[0, 1]] * len(w), n=1000, seed=seed)
    assert 0.95 <= rep.S1.sum() <= 1.05
    assert np.all(rep.ST >= rep.S1 - 0.03)
    np.testing.assert_allclose(rep.S1, w**2 / (w**2).sum(), atol=0.05)


def test_sobol_ishigami_five_seed_mean():
    pi = np.pi
    reps = [analyze.sobol_indices(analyze.ishigami, [[-pi, pi]] * 3, n=4096, seed=s, n_bootstrap=10)
            for s in range(5)]
    ref = analyze.ishigami_indices()
    np.testing.assert_allclose(np.mean([r.S1 for r in reps], axis=0), ref["S1"], atol=0.02)
    np.testing.assert_allclose(np.mean([r.ST for r in reps], axis=0), ref["ST"], atol=0.02)


def test_ishigami_closed_form_values():
    ref = analyze.ishigami_indices()
    np.testing.assert_allclose(ref["S1"], [0.3139, 0.4424, 0.0], atol=1e-4)
    assert ref["ST"][2] == pytest.approx(0.2437, abs=1e-4)


def test_sobol_errors_and_layout(tmp_path):
    with pytest.raises(ValidationError, match="sample budget too small"):
        analyze.sobol_indices(lambda X: X[:, 0], [[0, 1]], n=99)
    with pytest.raises(ValidationError):
        analyze.sobol_indices(lambda X: X[:, 0], [[1, 0]], n=100)
    rep = analyze.sobol_indices(lambda X: X[:, 0] * X[:, 1] + X[:, 2], [[0, 1]] * 3, n=128, seed=2,
                                names=["G", "A", "I"])
    rows = rep.to_table()
    assert rows[0] == ["Tasks", "ST", "S1", "S2", "STconf", "S1conf", "S2conf"]
    assert [r[0] for r in rows[1:]] == ["G", "A", "I", "G+A", "G+I", "A+I"]
    assert rows[1][3] == "non" and rows[4][1] == "non"
    rep.to_csv(tmp_path / "s.csv", "# h\n")
    assert (tmp_path / "s.csv").read_text().startswith("# h\nTasks,ST,S1,S2")


def test_sobol_deterministic():
    f = lambda X: np.sin(X[:, 0]) + X[:, 1] ** 2  # noqa: E731
    a = analyze.sobol_indices(f, [[0, 3], [0, 1]], n=256, seed=9)
    b = analyze.sobol_indices(f, [[0, 3], [0, 1]], n=256, seed=9)
    assert a.to_table() == b.to_table()


# ---------------------------------------------------------------- PDP


def _xy_table(n=50, seed=0):
    rng = np.random.default_rng(seed)
    x1, x2 = rng.uniform(0, 10, n), rng.uniform(-3, 3, n)
    return _table({"x1": x1, "x2": x2}, {"x1": "G", "x2": "A"}, 2 * x1 + 3 * x2)


def test_pdp_linear_slope_and_offset():
    t = _xy_table()
    m = LinearModel(["x1", "x2"], [2.0, 3.0])
    c = analyze.partial_dependence(m, t, "x1", grid_size=15)
    slope, offset = np.polyfit(c.grid, c.pd, 1)
    assert slope == pytest.approx(2.0, abs=1e-6)
    assert offset == pytest.approx(3 * t.frame["x2"].mean(), abs=1e-6)
    assert np.all(np.diff(c.grid) > 0) and c.n == 50


def test_pdp_ignored_feature_and_constant_model():
    t = _xy_table()
    c = analyze.partial_dependence(LinearModel(["x1", "x2"], [2.0, 0.0]), t, "x2")
    assert np.ptp(c.pd) < 1e-9
    c0 = analyze.partial_dependence(LinearModel(["x1", "x2"], [0.0, 0.0], 7.0), t, "x1")
    assert np.all(c0.pd == 7.0)


def test_pdp_errors():
    t = _table({"x1": np.ones(10), "x2": np.arange(10.0)}, {"x1": "G", "x2": "A"}, np.arange(10.0))
    m = LinearModel(["x1", "x2"], [1.0, 1.0])
    with pytest.raises(ValidationError, match="degenerate grid"):
        analyze.partial_dependence(m, t, "x1")
    with pytest.raises(ValidationError):
        analyze.partial_dependence(m, t, "nope")


def test_pdp_v_shape_equilibrium():
    rng = np.random.default_rng(3)
    x = rng.uniform(30, 100, 400)
    other = rng.normal(size=400)
    t = _table({"temp": x, "other": other}, {"temp": "G", "other": "A"}, np.abs(x - 70) + 100)
    m = models.fit(models.ModelSpec("gbrt", {"trees": 200, "depth": 3}, 0), t)
    c = analyze.partial_dependence(m, t, "temp", grid_size=41)
    step = c.grid[1] - c.grid[0]
    nearest = c.grid[np.argmin(np.abs(c.grid - 70))]
    assert abs(c.grid[np.argmin(c.pd)] - nearest) <= step + 1e-9


def test_pdp_artifacts():
    c = analyze.partial_dependence(LinearModel(["x1", "x2"], [2.0, 3.0]), _xy_table(), "x1", 5)
    svg = c.to_svg("h")
    assert svg.startswith("<!-- h -->") and svg.rstrip().endswith("</svg>")


# ---------------------------------------------------------------- lag correlation


@pytest.mark.parametrize("k", [1, 3, 10, 50])
def test_lag_exact_shift(k):
    x = np.random.default_rng(k).normal(size=400)
    y = np.concatenate([np.random.default_rng(99).normal(size=k), x[:-k]])
    rep = analyze.lag_correlation(x, y, max_lag=60)
    assert rep.best_lag == k
    assert rep.best_r == pytest.approx(1.0, abs=1e-12)


def test_lag_noise_is_weak():
    rng = np.random.default_rng(0)
    rep = analyze.lag_correlation(rng.normal(size=1000), rng.normal(size=1000), max_lag=20)
    assert abs(rep.best_r) < 0.2
    assert all(abs(r) <= 1 for r in rep.correlations.values())


def test_lag_errors(tmp_path):
    with pytest.raises(ValidationError):
        analyze.lag_correlation(np.arange(40.0), np.arange(40.0), max_lag=10)
    with pytest.raises(ValidationError):
        analyze.lag_correlation(np.ones(100), np.arange(100.0), max_lag=5)
    rep = analyze.lag_correlation(np.sin(np.arange(100.0)), np.cos(np.arange(100.0)), 5)
    analyze.write_lags_csv([rep], tmp_path / "l.csv", "# h\n")
    lines = (tmp_path / "l.csv").read_text().splitlines()
    assert lines[1] == "feature,lag,r,best" and len(lines) == 8


def test_lag_recovers_planted_irradiance(synth_store):
    res, t = synth_store
    truth = res.ground_truth["irradiance_lag"]
    rep = analyze.lag_correlation(t.frame[truth["feature"]], t.y, max_lag=90)
    assert abs(rep.best_lag - truth["lag_days"]) <= 2


# ---------------------------------------------------------------- beeswarm


def test_beeswarm_single_sample_and_zero(tmp_path):
    c, s = analyze.beeswarm_export((["G", "A"], [[0.5, -0.2]]), tmp_path)
    assert len(c.read_text().splitlines()) == 3
    analyze.beeswarm_export((["G", "A"], np.zeros((5, 2))), tmp_path, stem="zero")
    rows = (tmp_path / "zero.csv").read_text().splitlines()[1:]
    assert all(float(r.split(",")[2]) == 0.0 for r in rows)
    with pytest.raises(ValidationError):
        analyze.beeswarm_export((["G"], np.zeros((0, 1))), tmp_path)


def test_beeswarm_same_seed_byte_identical(tmp_path):
    vals = np.random.default_rng(0).normal(size=(30, 4))
    fv = np.random.default_rng(1).uniform(size=(30, 4))
    names = ["G", "A", "I", "S"]
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    _, s1 = analyze.beeswarm_export((names, vals), tmp_path / "a", fv, seed=3)
    _, s2 = analyze.beeswarm_export((names, vals), tmp_path / "b", fv, seed=3)
    assert s1.read_bytes() == s2.read_bytes()
