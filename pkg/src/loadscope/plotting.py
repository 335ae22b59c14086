"""Minimal deterministic SVG charts.

Output depends only on the inputs: fixed number formatting, no timestamps,
no random ids.  That keeps re-runs byte-identical.
"""

from __future__ import annotations

from html import escape
from typing import Sequence

import numpy as np

PALETTE = ("#4C72B0", "#DD8452", "#55A868", "#C44E52", "#8172B3", "#937860", "#DA8BC3")
W, H = 640, 400
ML, MR, MT, MB = 70, 20, 40, 60


def _f(v: float) -> str:
    return f"{v:.2f}"


def _open(title: str, header: str = "") -> list[str]:
    parts = []
    if header:
        parts.append(f"<!-- {escape(header.strip())} -->")
    parts.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">')
    parts.append(f'<rect width="{W}" height="{H}" fill="white"/>')
    parts.append(f'<text x="{W / 2:.0f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    return parts


def _scale(lo: float, hi: float, a: float, b: float):
    if hi == lo:
        hi = lo + 1.0
    return lambda v: a + (v - lo) / (hi - lo) * (b - a)


def _axes(parts, x_lo, x_hi, y_lo, y_hi, xlabel, ylabel, sx, sy, x_ticks=True):
    parts.append(f'<line x1="{ML}" y1="{H - MB}" x2="{W - MR}" y2="{H - MB}" stroke="black"/>')
    parts.append(f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{H - MB}" stroke="black"/>')
    for t in np.linspace(y_lo, y_hi, 5):
        y = sy(t)
        parts.append(f'<line x1="{ML - 4}" y1="{_f(y)}" x2="{ML}" y2="{_f(y)}" stroke="black"/>')
        parts.append(f'<text x="{ML - 6}" y="{_f(y + 4)}" text-anchor="end">{t:.4g}</text>')
    if x_ticks:
        for t in np.linspace(x_lo, x_hi, 5):
            x = sx(t)
            parts.append(f'<line x1="{_f(x)}" y1="{H - MB}" x2="{_f(x)}" y2="{H - MB + 4}" stroke="black"/>')
            parts.append(f'<text x="{_f(x)}" y="{H - MB + 16}" text-anchor="middle">{t:.4g}</text>')
    parts.append(f'<text x="{(ML + W - MR) / 2:.0f}" y="{H - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="15" y="{(MT + H - MB) / 2:.0f}" text-anchor="middle" transform="rotate(-90 15 {(MT + H - MB) / 2:.0f})">{escape(ylabel)}</text>')


def line_chart(x: Sequence[float], series: dict[str, Sequence[float]], title: str,
               xlabel: str = "", ylabel: str = "", header: str = "") -> str:
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    all_y = np.concatenate(list(ys.values()))
    y_lo, y_hi = float(all_y.min()), float(all_y.max())
    pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    sx = _scale(float(x.min()), float(x.max()), ML, W - MR)
    sy = _scale(y_lo, y_hi, H - MB, MT)
    parts = _open(title, header)
    _axes(parts, float(x.min()), float(x.max()), y_lo, y_hi, xlabel, ylabel, sx, sy)
    for i, (name, y) in enumerate(ys.items()):
        pts = " ".join(f"{_f(sx(a))},{_f(sy(b))}" for a, b in zip(x, y))
        parts.append(f'<polyline fill="none" stroke="{PALETTE[i % len(PALETTE)]}" stroke-width="2" points="{pts}"/>')
        parts.append(f'<text x="{W - MR - 5}" y="{MT + 14 * (i + 1)}" text-anchor="end" fill="{PALETTE[i % len(PALETTE)]}">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def grouped_bar_chart(groups: Sequence[str], series: dict[str, Sequence[float]], title: str,
                      ylabel: str = "", header: str = "") -> str:
    """One cluster of bars per group, one bar per series key."""
    names = list(series)
    vals = np.array([series[k] for k in names], dtype=float)
    y_hi = float(vals.max()) * 1.1 if vals.size and vals.max() > 0 else 1.0
    sy = _scale(0.0, y_hi, H - MB, MT)
    parts = _open(title, header)
    _axes(parts, 0, 1, 0.0, y_hi, "", ylabel, lambda v: v, sy, x_ticks=False)
    slot = (W - MR - ML) / max(len(groups), 1)
    bar = slot * 0.8 / max(len(names), 1)
    for g, group in enumerate(groups):
        x0 = ML + g * slot + slot * 0.1
        for k, name in enumerate(names):
            v = vals[k, g]
            x = x0 + k * bar
            parts.append(f'<rect x="{_f(x)}" y="{_f(sy(v))}" width="{_f(bar)}" height="{_f(sy(0) - sy(v))}" fill="{PALETTE[k % len(PALETTE)]}"/>')
        parts.append(f'<text x="{_f(ML + g * slot + slot / 2)}" y="{H - MB + 16}" text-anchor="middle">{escape(group)}</text>')
    for k, name in enumerate(names):
        parts.append(f'<text x="{W - MR - 5}" y="{MT + 14 * (k + 1)}" text-anchor="end" fill="{PALETTE[k % len(PALETTE)]}">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def strip_plot(names: Sequence[str], values: np.ndarray, title: str, seed: int = 0,
               color_values: np.ndarray | None = None, header: str = "") -> str:
    """Horizontal beeswarm-style strip plot, one row per name, seeded vertical jitter.

    ``values`` has shape (n_samples, n_names).  ``color_values`` (same shape)
    colours points from blue (low) to red (high) within each column.
    """
    values = np.asarray(values, dtype=float)
    rng = np.random.default_rng(seed)
    lo, hi = float(values.min()), float(values.max())
    span = max(abs(lo), abs(hi)) or 1.0
    sx = _scale(-span, span, ML + 60, W - MR)
    parts = _open(title, header)
    row_h = (H - MT - MB) / max(len(names), 1)
    x0 = sx(0.0)
    parts.append(f'<line x1="{_f(x0)}" y1="{MT}" x2="{_f(x0)}" y2="{H - MB}" stroke="#999"/>')
    for j, name in enumerate(names):
        yc = MT + (j + 0.5) * row_h
        parts.append(f'<text x="{ML + 55}" y="{_f(yc + 4)}" text-anchor="end">{escape(name)}</text>')
        col = values[:, j]
        jitter = rng.uniform(-0.35, 0.35, len(col)) * row_h
        if color_values is not None:
            c = np.asarray(color_values[:, j], dtype=float)
            rng_c = (c.max() - c.min()) or 1.0
            frac = (c - c.min()) / rng_c
        else:
            frac = np.full(len(col), 0.5)
        for v, dy, fr in zip(col, jitter, frac):
            red, blue = int(255 * fr), int(255 * (1 - fr))
            parts.append(f'<circle cx="{_f(sx(v))}" cy="{_f(yc + dy)}" r="2" fill="rgb({red},40,{blue})" fill-opacity="0.7"/>')
    for t in np.linspace(-span, span, 5):
        parts.append(f'<text x="{_f(sx(t))}" y="{H - MB + 16}" text-anchor="middle">{t:.3g}</text>')
    parts.append(f'<text x="{(ML + W - MR) / 2:.0f}" y="{H - 15}" text-anchor="middle">attribution</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
