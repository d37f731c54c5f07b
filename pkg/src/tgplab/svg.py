"""Minimal native SVG line charts (no plotting dependency)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v):
    return f"{v:.2f}"


def _ticks(lo, hi, log):
    if log:
        return [10.0**e for e in range(math.floor(lo), math.ceil(hi) + 1)]
    step = 10 ** math.floor(math.log10(max(hi - lo, 1e-300)))
    if (hi - lo) / step < 4:
        step /= 2
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step) + 1)]


def _panel(series, x0, y0, w, h, title, xlabel, ylabel, logx, logy):
    """SVG fragments for one panel; series = [(label, xs, ys, dashed)]."""
    tx = (lambda v: math.log10(v)) if logx else float
    ty = (lambda v: math.log10(v)) if logy else float
    pts = [(tx(x), ty(y)) for _, xs, ys, _ in series for x, y in zip(xs, ys)
           if (x > 0 or not logx) and (y > 0 or not logy)]
    xs_all = [p[0] for p in pts] or [0.0, 1.0]
    ys_all = [p[1] for p in pts] or [0.0, 1.0]
    xlo, xhi = min(xs_all), max(xs_all)
    ylo, yhi = min(ys_all), max(ys_all)
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    def px(v):
        return x0 + (v - xlo) / (xhi - xlo) * w

    def py(v):
        return y0 + h - (v - ylo) / (yhi - ylo) * h

    out = [f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#333"/>']
    out.append(f'<text x="{x0 + w / 2}" y="{y0 - 10}" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{x0 + w / 2}" y="{y0 + h + 38}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    out.append(f'<text x="{x0 - 52}" y="{y0 + h / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 {x0 - 52} {y0 + h / 2})">{escape(ylabel)}</text>')
    for t in _ticks(xlo, xhi, logx):
        v = math.log10(t) if logx else t
        if xlo <= v <= xhi:
            out.append(f'<line x1="{_fmt(px(v))}" y1="{y0 + h}" x2="{_fmt(px(v))}" y2="{y0 + h + 5}" stroke="#333"/>')
            out.append(f'<text x="{_fmt(px(v))}" y="{y0 + h + 18}" text-anchor="middle" font-size="10">{t:g}</text>')
    for t in _ticks(ylo, yhi, logy):
        v = math.log10(t) if logy else t
        if ylo <= v <= yhi:
            out.append(f'<line x1="{x0 - 5}" y1="{_fmt(py(v))}" x2="{x0}" y2="{_fmt(py(v))}" stroke="#333"/>')
            out.append(f'<text x="{x0 - 8}" y="{_fmt(py(v) + 3)}" text-anchor="end" font-size="10">{t:g}</text>')
    for i, (label, xs, ys, dashed) in enumerate(series):
        colour = PALETTE[i % len(PALETTE)]
        coords = [f"{_fmt(px(tx(x)))},{_fmt(py(ty(y)))}" for x, y in zip(xs, ys)
                  if (x > 0 or not logx) and (y > 0 or not logy)]
        if not coords:
            continue
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        out.append(f'<polyline points="{" ".join(coords)}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>')
        if not dashed:
            for c in coords:
                cx, cy = c.split(",")
                out.append(f'<circle cx="{cx}" cy="{cy}" r="2.5" fill="{colour}"/>')
        ly = y0 + 16 + 16 * i
        out.append(f'<line x1="{x0 + w - 120}" y1="{ly}" x2="{x0 + w - 100}" y2="{ly}" stroke="{colour}"{dash}/>')
        out.append(f'<text x="{x0 + w - 95}" y="{ly + 4}" font-size="11">{escape(label)}</text>')
    return out


def line_chart(panels, width=None, height=420):
    """Render panels side by side. Each panel is a dict with keys series,
    title, xlabel, ylabel, logx, logy."""
    pw, ph = 380, height - 110
    width = width or 80 + len(panels) * (pw + 80)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">', '<rect width="100%" height="100%" fill="white"/>']
    for i, p in enumerate(panels):
        parts.extend(_panel(p["series"], 80 + i * (pw + 80), 40, pw, ph, p.get("title", ""),
                            p.get("xlabel", ""), p.get("ylabel", ""), p.get("logx", False), p.get("logy", False)))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
