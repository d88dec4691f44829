"""Canonical CSV/JSON writing and a small dependency-free SVG renderer."""
from __future__ import annotations

import csv
import io
import json
import math
import re
from fractions import Fraction
from html import escape
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, TextIO, Union

__all__ = [
    "format_cell",
    "parse_cell",
    "write_csv",
    "read_csv",
    "csv_text",
    "write_json",
    "line_plot",
    "bar_plot",
    "barcode_plot",
]

_INT = re.compile(r"^-?\d+$")


def format_cell(value) -> str:
    """Floats get 17 significant digits so they survive a round trip."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (float, Fraction)) or hasattr(value, "__float__"):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x + 0.0, ".17g")  # folds -0.0 into 0
    return str(value)


def parse_cell(text: str):
    if _INT.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_csv(target: Union[str, Path, TextIO], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    text = csv_text(header, rows)
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)


def read_csv(source: Union[str, Path]) -> tuple:
    """Return ``(header, rows)`` with numeric cells parsed."""
    with open(source, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[parse_cell(c) for c in row] for row in reader]
    return header, rows


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "__float__"):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(target: Union[str, Path, TextIO], doc) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default, allow_nan=False) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text)


# --- SVG -------------------------------------------------------------------

_W, _H = 640, 400
_PAD = dict(left=64, right=140, top=36, bottom=48)
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


def _ticks(lo: float, hi: float, count: int = 5) -> list:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    x = start
    while x <= hi + 1e-12 * step:
        out.append(round(x, 12))
        x += step
    return out


def _frame(title, xlabel, ylabel, xlo, xhi, ylo, yhi):
    pw = _W - _PAD["left"] - _PAD["right"]
    ph = _H - _PAD["top"] - _PAD["bottom"]

    def sx(x):
        return _PAD["left"] + (x - xlo) / ((xhi - xlo) or 1.0) * pw

    def sy(y):
        return _PAD["top"] + ph - (y - ylo) / ((yhi - ylo) or 1.0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{_PAD["left"]}" y="{_PAD["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for x in _ticks(xlo, xhi):
        parts.append(f'<text x="{sx(x):.1f}" y="{_H - _PAD["bottom"] + 14}" text-anchor="middle">{x:g}</text>')
    for y in _ticks(ylo, yhi):
        parts.append(f'<text x="{_PAD["left"] - 6}" y="{sy(y) + 4:.1f}" text-anchor="end">{y:g}</text>')
        parts.append(
            f'<line x1="{_PAD["left"]}" x2="{_PAD["left"] + pw}" y1="{sy(y):.1f}" y2="{sy(y):.1f}" stroke="#ddd"/>'
        )
    parts.append(f'<text x="{_PAD["left"] + pw / 2:.1f}" y="{_H - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(
        f'<text x="14" y="{_PAD["top"] + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {_PAD["top"] + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    return parts, sx, sy


def _legend(parts, labels):
    x0 = _W - _PAD["right"] + 10
    for k, label in enumerate(labels):
        y = _PAD["top"] + 14 + 16 * k
        c = _COLORS[k % len(_COLORS)]
        parts.append(f'<line x1="{x0}" x2="{x0 + 18}" y1="{y - 4}" y2="{y - 4}" stroke="{c}" stroke-width="2"/>')
        parts.append(f'<text x="{x0 + 24}" y="{y}">{escape(str(label))}</text>')


def line_plot(
    series: Mapping[str, tuple],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    ylim: Optional[tuple] = None,
) -> str:
    """Render ``{label: (xs, ys)}`` as polylines. Non-finite points break the line."""
    xs = [x for xv, _ in series.values() for x in xv]
    ys = [y for _, yv in series.values() for y in yv if math.isfinite(y)]
    xlo, xhi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    ylo, yhi = ylim or ((min(0.0, min(ys)), max(ys) * 1.05 or 1.0) if ys else (0.0, 1.0))
    parts, sx, sy = _frame(title, xlabel, ylabel, xlo, xhi, ylo, yhi)
    for k, (label, (xv, yv)) in enumerate(series.items()):
        c = _COLORS[k % len(_COLORS)]
        seg = []
        for x, y in list(zip(xv, yv)) + [(None, math.nan)]:
            if x is not None and math.isfinite(y) and ylo <= y <= yhi:
                seg.append(f"{sx(x):.1f},{sy(y):.1f}")
                continue
            if seg:
                parts.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{" ".join(seg)}"/>')
                if len(seg) == 1:
                    px, py = seg[0].split(",")
                    parts.append(f'<circle cx="{px}" cy="{py}" r="2" fill="{c}"/>')
            seg = []
    _legend(parts, series.keys())
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_plot(groups: Mapping[str, Sequence[float]], title: str = "", xlabel: str = "node", ylabel: str = "") -> str:
    """Grouped bars: one bar per (category index, label)."""
    labels = list(groups)
    m = max(len(v) for v in groups.values())
    top = max(max(v) for v in groups.values()) * 1.1 or 1.0
    parts, sx, sy = _frame(title, xlabel, ylabel, 0.5, m + 0.5, 0.0, top)
    width = 0.8 / max(len(labels), 1)
    for k, label in enumerate(labels):
        c = _COLORS[k % len(_COLORS)]
        for idx, v in enumerate(groups[label], start=1):
            x0 = idx - 0.4 + k * width
            parts.append(
                f'<rect x="{sx(x0):.1f}" y="{sy(v):.1f}" width="{sx(x0 + width) - sx(x0):.1f}" '
                f'height="{sy(0) - sy(v):.1f}" fill="{c}"/>'
            )
    _legend(parts, labels)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def barcode_plot(intervals: Sequence[tuple], n: int, t0: float, t1: float, title: str = "") -> str:
    """Activity chart: ``intervals`` are ``(node, start, end)``; node 1 on top."""
    parts, sx, _ = _frame(title, "time", "node", t0, t1, 0.0, float(n))
    ph = _H - _PAD["top"] - _PAD["bottom"]
    row = ph / n
    for node, a, b in intervals:
        a, b = max(a, t0), min(b, t1)
        if b <= a:
            continue
        y = _PAD["top"] + (node - 1) * row
        parts.append(
            f'<rect x="{sx(a):.2f}" y="{y + 1:.1f}" width="{max(sx(b) - sx(a), 0.3):.2f}" '
            f'height="{row - 2:.1f}" fill="black"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
