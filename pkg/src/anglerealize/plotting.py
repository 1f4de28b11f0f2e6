"""Minimal deterministic SVG line charts for the experiment CSVs."""
from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import numpy as np

from .experiments import CSVParseError, read_csv

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=150, top=40, bottom=50)
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def _fmt(v):
    return f"{v:.2f}"


def _nice_ticks(lo, hi, max_ticks=8):
    span = hi - lo
    for step in (m * 10.0 ** e for e in range(math.floor(math.log10(span)) - 1, 100) for m in (1, 2, 5)):
        if span / step <= max_ticks:
            break
    return [k * step for k in range(math.ceil(lo / step), math.floor(hi / step) + 1)]


class LogAxes:
    def __init__(self, xs, ys, log_x=False):
        self.log_x = log_x
        xs = np.asarray([x for x in xs if not log_x or x > 0], dtype=float)
        ys = np.asarray([y for y in ys if y > 0], dtype=float)
        if not xs.size or not ys.size:
            raise ValueError("nothing to plot")
        tx = np.log10(xs) if log_x else xs
        self.x_lo, self.x_hi = float(tx.min()), float(tx.max())
        if self.x_hi == self.x_lo:
            self.x_lo, self.x_hi = self.x_lo - 1, self.x_hi + 1
        self.y_lo = math.floor(float(np.log10(ys.min())))
        self.y_hi = math.ceil(float(np.log10(ys.max())))
        if self.y_hi == self.y_lo:
            self.y_hi += 1
        self.w = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(self, x):
        t = math.log10(x) if self.log_x else x
        return MARGIN["left"] + (t - self.x_lo) / (self.x_hi - self.x_lo) * self.w

    def py(self, y):
        return MARGIN["top"] + (self.y_hi - math.log10(y)) / (self.y_hi - self.y_lo) * self.h

    def frame(self, title, xlabel, ylabel):
        left, top = MARGIN["left"], MARGIN["top"]
        out = [f'<rect x="{left}" y="{top}" width="{self.w}" height="{self.h}" fill="none" stroke="#000"/>',
               f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="15">{title}</text>',
               f'<text x="{left + self.w / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="13">{xlabel}</text>',
               f'<text x="16" y="{top + self.h / 2:.1f}" text-anchor="middle" font-size="13" '
               f'transform="rotate(-90 16 {top + self.h / 2:.1f})">{ylabel}</text>']
        for e in range(self.y_lo, self.y_hi + 1):
            y = self.py(10.0 ** e)
            out.append(f'<line x1="{left - 4}" y1="{_fmt(y)}" x2="{left}" y2="{_fmt(y)}" stroke="#000"/>')
            out.append(f'<text x="{left - 7}" y="{_fmt(y + 4)}" text-anchor="end" font-size="11">1e{e}</text>')
        if self.log_x:
            ticks = [10.0 ** e for e in range(math.ceil(self.x_lo), math.floor(self.x_hi) + 1)]
            labels = [f"1e{round(math.log10(t))}" for t in ticks]
        else:
            ticks = _nice_ticks(self.x_lo, self.x_hi)
            labels = [f"{t:g}" for t in ticks]
        for t, lab in zip(ticks, labels):
            x = self.px(t)
            bottom = top + self.h
            out.append(f'<line x1="{_fmt(x)}" y1="{bottom}" x2="{_fmt(x)}" y2="{bottom + 4}" stroke="#000"/>')
            out.append(f'<text x="{_fmt(x)}" y="{bottom + 17}" text-anchor="middle" font-size="11">{lab}</text>')
        return out

    def polyline(self, xs, ys, color, dashed=False):
        pts = " ".join(f"{_fmt(self.px(x))},{_fmt(self.py(y))}" for x, y in zip(xs, ys) if y > 0)
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>'


def _legend(entries):
    x0 = WIDTH - MARGIN["right"] + 12
    out = []
    for i, (label, color, dashed) in enumerate(entries):
        y = MARGIN["top"] + 14 + 18 * i
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        out.append(f'<line x1="{x0}" y1="{y}" x2="{x0 + 22}" y2="{y}" stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{x0 + 28}" y="{y + 4}" font-size="11">{label}</text>')
    return out


def _document(body):
    return "\n".join([f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
                      f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
                      f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>', *body, "</svg>", ""])


def _medians(records, key, value):
    groups = defaultdict(list)
    for r in records:
        groups[key(r)].append(getattr(r, value))
    return {k: float(np.nanmedian(v)) if np.any(np.isfinite(v)) else math.nan
            for k, v in sorted(groups.items())}


def discrepancy_svg(records, value="discrepancy_mae") -> str:
    """Median ``value`` vs. number of imposed constraints, one line per (N, mode, sigma_a)."""
    med = _medians(records, lambda r: (r.N, r.mode, r.sigma_a, r.n_constraints), value)
    series = defaultdict(list)
    for (n, mode, sa, count), v in med.items():
        if np.isfinite(v):
            series[(n, mode, sa)].append((count, v))
    xs = [c for pts in series.values() for c, _ in pts]
    ys = [v for pts in series.values() for _, v in pts]
    ax = LogAxes(xs, ys)
    label = "discrepancy MAE [rad]" if value == "discrepancy_mae" else "accuracy MSE"
    body = ax.frame(f"{label} vs. constraints", "number of imposed constraints", label)
    legend = []
    for i, key in enumerate(sorted(series)):
        color = COLORS[i % len(COLORS)]
        pts = series[key]
        body.append(ax.polyline([p[0] for p in pts], [p[1] for p in pts], color, dashed=key[1] == "learned"))
        legend.append((f"N={key[0]} {key[1]}", color, key[1] == "learned"))
    return _document(body + _legend(legend))


def angle_distance_svg(records) -> str:
    """Median MSE vs. angle noise; distance baselines drawn as dashed horizontals."""
    angle = [r for r in records if r.mode == "angle"]
    dist = [r for r in records if r.mode == "distance"]
    a_med = _medians(angle, lambda r: (r.side, r.sigma_a), "accuracy_mse")
    d_med = _medians(dist, lambda r: (r.side, r.sigma_d), "accuracy_mse")
    sig = sorted({k[1] for k in a_med})
    ys = [v for v in list(a_med.values()) + list(d_med.values()) if np.isfinite(v)]
    ax = LogAxes(sig, ys, log_x=True)
    ns = ",".join(str(n) for n in sorted({r.N for r in records}))
    body = ax.frame(f"point recovery accuracy, N={ns}", "angle noise sigma_a [rad]", "MSE")
    legend = []
    sides = sorted({k[0] for k in a_med} | {k[0] for k in d_med})
    for i, side in enumerate(sides):
        color = COLORS[i % len(COLORS)]
        pts = [(s, a_med[(side, s)]) for s in sig if (side, s) in a_med and np.isfinite(a_med[(side, s)])]
        if pts:
            body.append(ax.polyline([p[0] for p in pts], [p[1] for p in pts], color))
            legend.append((f"angles, side {side:g}", color, False))
        for (d_side, sd), v in d_med.items():
            if d_side == side and np.isfinite(v) and v > 0:
                body.append(ax.polyline([sig[0], sig[-1]], [v, v], color, dashed=True))
                legend.append((f"dist {sd:g}, side {side:g}", color, True))
    return _document(body + _legend(legend))


def emit_plots(csv_path, out_dir) -> list[Path]:
    """Render one SVG per experiment (two for the discrepancy study)."""
    records = read_csv(csv_path)
    out_dir = Path(out_dir)
    by_exp = defaultdict(list)
    for r in records:
        by_exp[r.experiment].append(r)
    rendered = []
    for name, recs in sorted(by_exp.items()):
        if name == "discrepancy":
            rendered.append(("discrepancy.svg", discrepancy_svg(recs)))
            rendered.append(("discrepancy_accuracy.svg", discrepancy_svg(recs, "accuracy_mse")))
        elif name == "angle-vs-distance":
            rendered.append(("angle_vs_distance.svg", angle_distance_svg(recs)))
        else:
            raise CSVParseError(f"{csv_path}: unknown experiment {name!r}")
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fname, text in rendered:
        path = out_dir / fname
        path.write_text(text)
        paths.append(path)
    return paths
