"""Synthetic feature store with a planted, documented load function.

Daily peak load (MW) is built as::

    load = base
         + 4.0 * |temp_max - 70|                    V-shape, equilibrium at 70 F
         + 2.0 * |temp_mean - 55|                   V-shape, equilibrium at 55 F
         + 0.8 * (humidity - 65)
         - 6.0 * (wind_speed - 10)
         + 20  * (clearsky_ghi(t - 50) - 4.5)       irradiance acting 50 days later
         - 30  * (ghi - mean ghi)
         + 60  * (methane_price - 4)                dominant integrated-energy term
         + 25  * (natural_gas_price - 5)            monthly series, linear between months
         - 30  * (propane_price - 2)
         - 0.5 * (methane_consumption - 100)
         + 6.0 * work_hours                         weekday term
         + noise * N(0, 15)

The other features are independent of the load: white noise around a level,
some with variance below the default variance threshold.  About 3% of the
cells of a few feature files are blanked to exercise imputation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from ._validation import ValidationError
from .stdb import Dimension, FeatureSeries, day_numbers

PLANTED = {
    "temp_max": ("G", "F", "v_shape", 0, "4.0*|x-70|"),
    "temp_mean": ("G", "F", "v_shape", 0, "2.0*|x-55|"),
    "humidity": ("G", "%", "linear", 0, "0.8*(x-65)"),
    "wind_speed": ("G", "mph", "linear", 0, "-6.0*(x-10)"),
    "clearsky_ghi": ("A", "kWh/m2", "linear", 50, "20*(x(t-50)-4.5)"),
    "clearsky_ghi_lag50": ("A", "kWh/m2", "linear", 0, "same term as clearsky_ghi, pre-shifted by 50 days"),
    "ghi": ("A", "kWh/m2", "linear", 0, "-30*(x-mean)"),
    "methane_price": ("I", "$/MMBtu", "linear", 0, "60*(x-4)"),
    "natural_gas_price": ("I", "$/Mcf", "linear", 0, "25*(x-5), monthly"),
    "propane_price": ("I", "$/gal", "linear", 0, "-30*(x-2)"),
    "methane_consumption": ("I", "MMcf", "linear", 0, "-0.5*(x-100)"),
    "work_hours": ("S", "h", "weekday", 0, "6.0*x"),
}
# feature files that receive random gaps
_GAPPY = ("humidity", "wind_speed", "propane_price", "methane_consumption")

_EXTRA_NAMES = {
    "G": ["dew_point", "air_pressure", "visibility", "precipitation", "snowfall", "cloud_cover",
          "no2", "so2", "ozone", "pm25", "soil_moisture", "river_level", "gust_speed",
          "elevation_index", "min_temp_spread", "frost_index", "drought_index", "lake_temp",
          "sea_level_pressure", "uv_index", "pollen_count", "storm_count", "lightning_strikes", "fog_hours"],
    "A": ["lunar_phase", "tide_height", "sunspot_number", "geomagnetic_index", "solar_flux",
          "moon_distance", "meteor_rate", "cosmic_ray_flux", "aurora_index", "solar_wind", "planet_alignment"],
    "I": ["coal_price", "oil_price", "hydrogen_price", "biomass_output", "ethanol_price", "uranium_price"],
    "S": ["holiday", "school_term", "major_event", "sports_event", "retail_index", "traffic_index", "tourism_index"],
}


@dataclass
class SynthConfig:
    days: int = 3000
    start: str = "2003-01-01"
    features: dict = field(default_factory=lambda: {"G": 28, "A": 14, "I": 10, "S": 8})
    noise: float = 1.0
    missing_fraction: float = 0.03

    @classmethod
    def from_dict(cls, d: dict | None) -> "SynthConfig":
        d = dict(d or {})
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown synth parameters: {sorted(unknown)}")
        return cls(**d)


def planted_counts() -> dict[str, int]:
    counts = {"G": 0, "A": 0, "I": 0, "S": 0}
    for dim, *_ in PLANTED.values():
        counts[dim] += 1
    return counts


@dataclass
class SynthResult:
    series: list[FeatureSeries]
    ground_truth: dict


def generate(config: SynthConfig | dict | None = None, seed: int = 0) -> SynthResult:
    """Build all series in memory.  Same config and seed give identical output."""
    cfg = config if isinstance(config, SynthConfig) else SynthConfig.from_dict(config)
    need = planted_counts()
    for dim, n_planted in need.items():
        if cfg.features.get(dim, 0) < n_planted:
            raise ValidationError(f"dimension {dim}: {cfg.features.get(dim, 0)} features requested, {n_planted} planted")
    if cfg.days < 400:
        raise ValidationError("days must be >= 400")
    rng = np.random.default_rng(seed)
    lag = 50
    dates = pd.date_range(cfg.start, periods=cfg.days, freq="D")
    ext = pd.date_range(dates[0] - pd.Timedelta(days=lag), dates[-1], freq="D")
    doy_ext = ext.dayofyear.to_numpy()
    doy = dates.dayofyear.to_numpy()
    n = cfg.days

    def seasonal(d, peak_day, amp):
        return amp * np.cos(2 * np.pi * (d - peak_day) / 365.25)

    def ar1(phi, sd, size):
        out = np.empty(size)
        out[0] = rng.standard_normal() * sd
        innov = rng.standard_normal(size) * sd * np.sqrt(1 - phi**2)
        for t in range(1, size):
            out[t] = phi * out[t - 1] + innov[t]
        return out

    v = {}
    v["temp_max"] = 76 + seasonal(doy, 200, 18) + rng.normal(0, 6, n)
    v["temp_mean"] = v["temp_max"] - 12 + rng.normal(0, 3, n)
    v["humidity"] = 65 + seasonal(doy, 210, 10) + rng.normal(0, 8, n)
    v["wind_speed"] = 10 + seasonal(doy, 30, 2) + rng.normal(0, 4, n)
    ck_ext = np.clip(4.5 + seasonal(doy_ext, 172, 1.5) + rng.normal(0, 2.0, len(ext)), 0.2, None)
    v["clearsky_ghi"] = ck_ext[lag:]
    v["clearsky_ghi_lag50"] = ck_ext[:-lag]
    v["ghi"] = (4.5 + seasonal(doy, 172, 1.5)) * rng.uniform(0.4, 1.0, n) + rng.normal(0, 0.8, n)
    v["methane_price"] = 4 + seasonal(doy, 200, 0.6) + ar1(0.97, 1.4, n)
    months = pd.date_range(dates[0], dates[-1], freq="MS")
    gas_monthly = 5 + seasonal(months.dayofyear.to_numpy(), 200, 1.0) + ar1(0.6, 1.2, len(months))
    v["propane_price"] = 2 + seasonal(doy, 350, 0.5) + ar1(0.9, 1.1, n)
    v["methane_consumption"] = 100 + seasonal(doy, 20, 30) + rng.normal(0, 12, n)
    v["work_hours"] = np.where(dates.dayofweek.to_numpy() < 5, 8.0, 0.0)

    gas_daily = np.interp(day_numbers(dates), day_numbers(months), gas_monthly)
    noise = cfg.noise * rng.normal(0, 15, n)
    load = (
        1200
        + 4.0 * np.abs(v["temp_max"] - 70)
        + 2.0 * np.abs(v["temp_mean"] - 55)
        + 0.8 * (v["humidity"] - 65)
        - 6.0 * (v["wind_speed"] - 10)
        + 20 * (v["clearsky_ghi_lag50"] - 4.5)
        - 30 * (v["ghi"] - v["ghi"].mean())
        + 60 * (v["methane_price"] - 4)
        + 25 * (gas_daily - 5)
        - 30 * (v["propane_price"] - 2)
        - 0.5 * (v["methane_consumption"] - 100)
        + 6.0 * v["work_hours"]
        + noise
    )

    series: list[FeatureSeries] = []
    for name, (dim, unit, *_rest) in PLANTED.items():
        if name == "natural_gas_price":
            series.append(FeatureSeries(name, dim, unit, "monthly", months, gas_monthly))
            continue
        values = v[name].copy()
        if name in _GAPPY and cfg.missing_fraction > 0:
            values[rng.random(n) < cfg.missing_fraction] = np.nan
        series.append(FeatureSeries(name, dim, unit, "daily", dates, values))

    extras = []
    for dim in ("G", "A", "I", "S"):
        n_extra = cfg.features[dim] - need[dim]
        pool = _EXTRA_NAMES[dim]
        for i in range(n_extra):
            name = pool[i] if i < len(pool) else f"{Dimension(dim).long_name}_aux_{i:02d}"
            level = rng.uniform(1, 100)
            # every third independent feature sits below the 0.88 variance threshold
            sd = 0.5 if i % 3 == 2 else rng.uniform(1.5, 10)
            if name == "lunar_phase":
                values = 0.5 * (1 - np.cos(2 * np.pi * np.arange(n) / 29.53)) * 10 + rng.normal(0, 1, n)
            elif name == "coal_price":
                m_vals = level + rng.normal(0, sd, len(months))
                series.append(FeatureSeries(name, dim, "$/short ton", "monthly", months, m_vals))
                extras.append(name)
                continue
            else:
                values = level + rng.normal(0, sd, n)
            if i % 4 == 0 and cfg.missing_fraction > 0:
                values = values.copy()
                values[rng.random(n) < cfg.missing_fraction] = np.nan
            series.append(FeatureSeries(name, dim, "1", "daily", dates, values))
            extras.append(name)

    series.append(FeatureSeries("load", "L", "MW", "daily", dates, load))
    truth = {
        "seed": seed,
        "config": {"days": cfg.days, "start": cfg.start, "features": cfg.features,
                   "noise": cfg.noise, "missing_fraction": cfg.missing_fraction},
        "target": "load",
        "dominant_dimension": "I",
        "planted": [
            {"name": name, "dimension": dim, "form": form, "lag": lag_k, "term": term}
            for name, (dim, _unit, form, lag_k, term) in PLANTED.items()
        ],
        "independent": extras,
        "equilibrium": {"temp_max": 70.0, "temp_mean": 55.0},
        "irradiance_lag": {"feature": "clearsky_ghi", "lag_days": lag},
    }
    return SynthResult(series, truth)


def _fmt(v: float) -> str:
    return "" if np.isnan(v) else repr(float(v))


def write_synth(out_dir: str | Path, config: SynthConfig | dict | None = None, seed: int = 0, header: str = "",
                provenance: dict | None = None) -> SynthResult:
    """Write one ``date,value`` CSV per series plus ``manifest.json`` and ``ground_truth.json``."""
    out = Path(out_dir)
    (out / "data").mkdir(parents=True, exist_ok=True)
    result = generate(config, seed)
    manifest = []
    for s in result.series:
        fname = f"data/{s.name}.csv"
        with open(out / fname, "w", encoding="utf-8", newline="") as fh:
            fh.write(header)
            fh.write("date,value\n")
            for d, val in zip(s.dates, s.values):
                fh.write(f"{d.date().isoformat()},{_fmt(val)}\n")
        manifest.append({"file": fname, "name": s.name, "dimension": s.dimension.value,
                         "unit": s.unit, "cadence": s.cadence})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    truth = {**result.ground_truth, "provenance": provenance} if provenance else result.ground_truth
    (out / "ground_truth.json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return result
