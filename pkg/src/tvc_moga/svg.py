"""Minimal deterministic SVG 1.1 charts.

Output depends only on the data: fixed canvas, fixed number formatting, no
timestamps or random ids, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import math
from html import escape
from typing import Sequence

import numpy as np

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=80, right=150, top=40, bottom=60)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _f(v: float) -> str:
    return f"{v:.2f}"


def nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0, 1.0]
    if hi <= lo:
        pad = abs(lo) * 0.1 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    v = start
    while v <= hi + step * 0.5:
        ticks.append(round(v, 12))
        v += step
    if ticks[-1] < hi:
        ticks.append(round(v, 12))
    return ticks


def _fmt_tick(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.2e}"
    return f"{v:.4g}"


class _Axes:
    def __init__(self, xs, ys, x0=MARGIN["left"], y0=MARGIN["top"], w=None, h=None):
        self.w = w if w is not None else WIDTH - MARGIN["left"] - MARGIN["right"]
        self.h = h if h is not None else HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        self.x0, self.y0 = x0, y0
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        self.xt = nice_ticks(float(np.min(xs)), float(np.max(xs))) if xs.size else [0.0, 1.0]
        self.yt = nice_ticks(float(np.min(ys)), float(np.max(ys))) if ys.size else [0.0, 1.0]

    def px(self, x):
        return self.x0 + (x - self.xt[0]) / (self.xt[-1] - self.xt[0]) * self.w

    def py(self, y):
        return self.y0 + self.h - (y - self.yt[0]) / (self.yt[-1] - self.yt[0]) * self.h

    def frame(self, xlabel: str, ylabel: str) -> list[str]:
        x0, y0, w, h = self.x0, self.y0, self.w, self.h
        out = [f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(w)}" height="{_f(h)}" fill="none" stroke="#000"/>']
        for t in self.xt:
            x = self.px(t)
            out.append(f'<line x1="{_f(x)}" y1="{_f(y0 + h)}" x2="{_f(x)}" y2="{_f(y0 + h + 5)}" stroke="#000"/>')
            out.append(f'<text x="{_f(x)}" y="{_f(y0 + h + 18)}" text-anchor="middle" font-size="11">{_fmt_tick(t)}</text>')
        for t in self.yt:
            y = self.py(t)
            out.append(f'<line x1="{_f(x0 - 5)}" y1="{_f(y)}" x2="{_f(x0)}" y2="{_f(y)}" stroke="#000"/>')
            out.append(f'<text x="{_f(x0 - 8)}" y="{_f(y + 4)}" text-anchor="end" font-size="11">{_fmt_tick(t)}</text>')
        out.append(f'<text x="{_f(x0 + w / 2)}" y="{_f(y0 + h + 40)}" text-anchor="middle" font-size="13">{escape(xlabel)}</text>')
        out.append(
            f'<text x="{_f(x0 - 60)}" y="{_f(y0 + h / 2)}" text-anchor="middle" font-size="13" '
            f'transform="rotate(-90 {_f(x0 - 60)} {_f(y0 + h / 2)})">{escape(ylabel)}</text>'
        )
        return out


def _document(body: list[str], title: str, width=WIDTH, height=HEIGHT) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f"<title>{escape(title)}</title>",
        f'<rect width="{width}" height="{height}" fill="#fff"/>',
        f'<text x="{width / 2:.2f}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _legend(entries: list[tuple[str, str]], x: float, y: float) -> list[str]:
    out = []
    for i, (label, color) in enumerate(entries):
        yy = y + 18 * i
        out.append(f'<rect x="{_f(x)}" y="{_f(yy - 9)}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{_f(x + 18)}" y="{_f(yy + 2)}" font-size="12">{escape(label)}</text>')
    return out


def line_chart(series: Sequence[tuple[str, Sequence[float], Sequence[float]]], title: str, xlabel: str, ylabel: str) -> str:
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series]) if series else np.zeros(0)
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series]) if series else np.zeros(0)
    ax = _Axes(xs, ys)
    body = ax.frame(xlabel, ylabel)
    for k, (_, x, y) in enumerate(series):
        pts = " ".join(f"{_f(ax.px(a))},{_f(ax.py(b))}" for a, b in zip(x, y))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{COLORS[k % len(COLORS)]}" stroke-width="1.5"/>')
    body += _legend([(s[0], COLORS[k % len(COLORS)]) for k, s in enumerate(series)], WIDTH - MARGIN["right"] + 15, MARGIN["top"] + 10)
    return _document(body, title)


def scatter_chart(x, y, title: str, xlabel: str, ylabel: str, markers: dict[str, tuple[float, float]] | None = None) -> str:
    markers = markers or {}
    mx = [p[0] for p in markers.values()]
    my = [p[1] for p in markers.values()]
    ax = _Axes(np.concatenate([np.asarray(x, dtype=float), mx]), np.concatenate([np.asarray(y, dtype=float), my]))
    body = ax.frame(xlabel, ylabel)
    for a, b in zip(x, y):
        body.append(f'<circle cx="{_f(ax.px(a))}" cy="{_f(ax.py(b))}" r="3" fill="{COLORS[0]}"/>')
    legend = [("front members", COLORS[0])]
    for k, (label, (a, b)) in enumerate(markers.items()):
        color = COLORS[1 + k % (len(COLORS) - 1)]
        cx, cy = ax.px(a), ax.py(b)
        body.append(f'<rect x="{_f(cx - 5)}" y="{_f(cy - 5)}" width="10" height="10" fill="none" stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{_f(cx + 8)}" y="{_f(cy - 8)}" font-size="12" fill="{color}">{escape(label)}</text>')
        legend.append((label, color))
    body += _legend(legend, WIDTH - MARGIN["right"] + 15, MARGIN["top"] + 10)
    return _document(body, title)


def bar_panels(panels: Sequence[tuple[str, Sequence[str], Sequence[float]]], title: str, cols: int = 2) -> str:
    """Grid of bar charts, one panel per (title, category labels, values)."""
    pw, ph = 380, 250
    rows = math.ceil(len(panels) / cols)
    width, height = cols * pw + 20, rows * ph + 40
    body = []
    for k, (ptitle, labels, values) in enumerate(panels):
        ox, oy = 10 + (k % cols) * pw, 40 + (k // cols) * ph
        vals = np.asarray(values, dtype=float)
        finite = vals[np.isfinite(vals)]
        ax = _Axes([0, max(len(vals), 1)], np.concatenate([[0.0], finite]), x0=ox + 60, y0=oy + 25, w=pw - 80, h=ph - 85)
        ax.xt = [0.0, float(max(len(vals), 1))]
        body.append(f'<text x="{_f(ox + pw / 2)}" y="{_f(oy + 15)}" text-anchor="middle" font-size="13">{escape(ptitle)}</text>')
        body.append(f'<rect x="{_f(ax.x0)}" y="{_f(ax.y0)}" width="{_f(ax.w)}" height="{_f(ax.h)}" fill="none" stroke="#000"/>')
        for t in ax.yt:
            y = ax.py(t)
            body.append(f'<text x="{_f(ax.x0 - 6)}" y="{_f(y + 4)}" text-anchor="end" font-size="10">{_fmt_tick(t)}</text>')
            body.append(f'<line x1="{_f(ax.x0 - 4)}" y1="{_f(y)}" x2="{_f(ax.x0)}" y2="{_f(y)}" stroke="#000"/>')
        bw = ax.w / max(len(vals), 1)
        for i, (label, v) in enumerate(zip(labels, vals)):
            x = ax.x0 + i * bw
            if math.isfinite(v):
                top, base = ax.py(max(v, 0.0)), ax.py(min(v, 0.0))
                body.append(f'<rect x="{_f(x + bw * 0.15)}" y="{_f(top)}" width="{_f(bw * 0.7)}" height="{_f(base - top)}" fill="{COLORS[0]}"/>')
            body.append(
                f'<text x="{_f(x + bw / 2)}" y="{_f(ax.y0 + ax.h + 12)}" text-anchor="end" font-size="9" '
                f'transform="rotate(-45 {_f(x + bw / 2)} {_f(ax.y0 + ax.h + 12)})">{escape(label)}</text>'
            )
    return _document(body, title, width, height)
