"""Byte-deterministic SVG rendering for ROC panels, ranking bars and Shapley plots."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import UsageError

KINDS = ("roc", "ranking-bar", "shap-bar", "shap-summary")
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


@dataclass(frozen=True)
class PlotSpec:
    """``series`` layout per kind:

    roc: list of {"label", "fpr", "tpr", "auc"}
    ranking-bar, shap-bar: list of {"label", "value"}, drawn in the given order
    shap-summary: list of {"label", "phi", "level"} points, one per case and feature
    """

    kind: str
    series: list
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError("PLOT_KIND", f"unknown plot kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not self.series:
            raise UsageError("EMPTY", f"{self.kind} plot has no data")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "title": self.title, "x_label": self.x_label,
                "y_label": self.y_label, "series": self.series, "meta": self.meta}

    @classmethod
    def from_dict(cls, d: dict) -> "PlotSpec":
        return cls(d["kind"], d["series"], d.get("title", ""), d.get("x_label", ""),
                   d.get("y_label", ""), d.get("meta", {}))


def _n(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Canvas:
    def __init__(self, width, height):
        self.width, self.height = width, height
        self.parts = []

    def add(self, s):
        self.parts.append(s)

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(f'<line x1="{_n(x1)}" y1="{_n(y1)}" x2="{_n(x2)}" y2="{_n(y2)}" '
                 f'stroke="{stroke}" stroke-width="{_n(width)}"{extra}/>')

    def rect(self, x, y, w, h, fill):
        self.add(f'<rect x="{_n(x)}" y="{_n(y)}" width="{_n(w)}" height="{_n(h)}" fill="{fill}"/>')

    def circle(self, x, y, r, fill):
        self.add(f'<circle cx="{_n(x)}" cy="{_n(y)}" r="{_n(r)}" fill="{fill}"/>')

    def polyline(self, pts, stroke, width=2.0):
        p = " ".join(f"{_n(x)},{_n(y)}" for x, y in pts)
        self.add(f'<polyline points="{p}" fill="none" stroke="{stroke}" stroke-width="{_n(width)}"/>')

    def text(self, x, y, s, size=12, anchor="start", rotate=None):
        tr = f' transform="rotate({rotate} {_n(x)} {_n(y)})"' if rotate is not None else ""
        self.add(f'<text x="{_n(x)}" y="{_n(y)}" font-family="sans-serif" font-size="{size}" '
                 f'text-anchor="{anchor}"{tr}>{escape(str(s))}</text>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">')
        body = "\n".join(self.parts)
        return f'<?xml version="1.0" encoding="UTF-8"?>\n{head}\n<rect width="100%" height="100%" fill="#fff"/>\n{body}\n</svg>\n'


def _frame(c, left, top, w, h, spec, xticks, yticks, xmap, ymap):
    c.line(left, top + h, left + w, top + h)
    c.line(left, top, left, top + h)
    for v in xticks:
        x = xmap(v)
        c.line(x, top + h, x, top + h + 5)
        c.text(x, top + h + 18, _n(v), 11, "middle")
    for v in yticks:
        y = ymap(v)
        c.line(left - 5, y, left, y)
        c.text(left - 8, y + 4, _n(v), 11, "end")
    if spec.title:
        c.text(left + w / 2, top - 15, spec.title, 15, "middle")
    if spec.x_label:
        c.text(left + w / 2, top + h + 40, spec.x_label, 12, "middle")
    if spec.y_label:
        c.text(left - 45, top + h / 2, spec.y_label, 12, "middle", rotate=-90)


def _roc(spec: PlotSpec) -> str:
    c = _Canvas(760, 560)
    left, top, w, h = 80, 50, 420, 420
    xmap = lambda v: left + v * w
    ymap = lambda v: top + h - v * h
    ticks = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    _frame(c, left, top, w, h, spec, ticks, ticks, xmap, ymap)
    c.line(xmap(0), ymap(0), xmap(1), ymap(1), "#999", 1.0, "4,4")
    for i, s in enumerate(spec.series):
        color = COLORS[i % len(COLORS)]
        c.polyline([(xmap(x), ymap(y)) for x, y in zip(s["fpr"], s["tpr"])], color)
        ly = top + 10 + 20 * i
        c.line(left + w + 20, ly, left + w + 45, ly, color, 3.0)
        label = f'{s["label"]} (AUC = {s["auc"]:.3f})' if s.get("label") else f'AUC = {s["auc"]:.3f}'
        c.text(left + w + 52, ly + 4, label, 11)
    return c.render()


def _bars(spec: PlotSpec) -> str:
    n = len(spec.series)
    row = 22
    left, top, w = 220, 50, 420
    h = row * n
    c = _Canvas(left + w + 80, top + h + 70)
    vmax = max(float(s["value"]) for s in spec.series)
    vmin = min(0.0, min(float(s["value"]) for s in spec.series))
    span = (vmax - vmin) or 1.0
    xmap = lambda v: left + (v - vmin) / span * w
    ticks = [vmin + span * t / 4 for t in range(5)]
    _frame(c, left, top, w, h, spec, ticks, [], xmap, lambda v: v)
    for i, s in enumerate(spec.series):
        y = top + i * row + 3
        v = float(s["value"])
        c.rect(min(xmap(0), xmap(v)), y, abs(xmap(v) - xmap(0)), row - 6, COLORS[0])
        c.text(left - 8, y + row / 2 + 1, s["label"], 11, "end")
        c.text(max(xmap(0), xmap(v)) + 4, y + row / 2 + 1, f"{v:.3f}", 10)
    return c.render()


def _level_color(level: float) -> str:
    level = min(max(float(level), 0.0), 1.0)
    r = int(round(30 + 225 * level))
    b = int(round(255 - 225 * level))
    return f"#{r:02x}30{b:02x}"


def _summary(spec: PlotSpec) -> str:
    order = []
    for p in spec.series:
        if p["label"] not in order:
            order.append(p["label"])
    row = 26
    left, top, w = 220, 50, 420
    h = row * len(order)
    c = _Canvas(left + w + 120, top + h + 70)
    phis = np.array([float(p["phi"]) for p in spec.series])
    lim = float(np.max(np.abs(phis))) or 1.0
    xmap = lambda v: left + (v + lim) / (2 * lim) * w
    ticks = [-lim, -lim / 2, 0.0, lim / 2, lim]
    _frame(c, left, top, w, h, spec, ticks, [], xmap, lambda v: v)
    c.line(xmap(0), top, xmap(0), top + h, "#999", 1.0, "3,3")
    counts = {name: 0 for name in order}
    for p in spec.series:
        i = order.index(p["label"])
        # deterministic vertical spread by arrival order within the row
        k = counts[p["label"]]
        counts[p["label"]] += 1
        jitter = ((k * 0.618034) % 1.0 - 0.5) * (row - 10)
        c.circle(xmap(float(p["phi"])), top + i * row + row / 2 + jitter, 2.5, _level_color(p["level"]))
    for i, name in enumerate(order):
        c.text(left - 8, top + i * row + row / 2 + 4, name, 11, "end")
    c.text(left + w + 20, top + 10, "feature value", 11)
    c.rect(left + w + 20, top + 18, 12, 12, _level_color(1.0))
    c.text(left + w + 38, top + 28, "high", 11)
    c.rect(left + w + 20, top + 36, 12, 12, _level_color(0.0))
    c.text(left + w + 38, top + 46, "low", 11)
    return c.render()


def render(spec: PlotSpec) -> str:
    if spec.kind == "roc":
        return _roc(spec)
    if spec.kind == "shap-summary":
        return _summary(spec)
    return _bars(spec)


def render_plot(spec: PlotSpec, path) -> None:
    Path(path).write_text(render(spec))


def save_spec(spec: PlotSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")


def load_spec(path) -> PlotSpec:
    return PlotSpec.from_dict(json.loads(Path(path).read_text()))


def roc_spec(curves, title="ROC curves") -> PlotSpec:
    """``curves``: iterable of (label, RocCurve)."""
    series = [{"label": label, "fpr": [float(v) for v in rc.fpr], "tpr": [float(v) for v in rc.tpr],
               "auc": float(rc.auc)} for label, rc in curves]
    return PlotSpec("roc", series, title, "False positive rate", "True positive rate")


def ranking_spec(items, title="Model ranking by mean-test AUC") -> PlotSpec:
    """``items``: (label, mean-test AUC); bars sorted descending, ties in input order."""
    items = sorted(items, key=lambda t: -t[1])
    return PlotSpec("ranking-bar", [{"label": k, "value": float(v)} for k, v in items], title, "Mean-test AUC")
