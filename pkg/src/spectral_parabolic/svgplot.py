"""Minimal SVG line plots (axes, optional log scales, markers).

Only coordinate transforms happen here; plots are renderings of CSV columns.
"""
import csv
import math

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

W, H = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 40, 60


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, (b - a) // 8)
        return [float(v) for v in range(a, b + 1, step)]
    if hi == lo:
        return [lo]
    raw = (hi - lo) / 6
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * abs(hi):
        out.append(v)
        v += step
    return out


def _fmt(v, log):
    if log:
        return f"1e{int(round(v))}"
    return f"{v:.4g}"


def line_plot(series, xlabel="", ylabel="", title="", logx=False, logy=False):
    """Render ``series`` = [(label, xs, ys), ...] as an SVG document string."""
    pts = []
    for label, xs, ys in series:
        keep = [(x, y) for x, y in zip(xs, ys)
                if math.isfinite(x) and math.isfinite(y)
                and (not logx or x > 0) and (not logy or y > 0)]
        tx = [math.log10(x) if logx else x for x, _ in keep]
        ty = [math.log10(y) if logy else y for _, y in keep]
        pts.append((label, tx, ty))
    allx = [v for _, xs, _ in pts for v in xs] or [0.0, 1.0]
    ally = [v for _, _, ys in pts for v in ys] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(v):
        return LEFT + (v - x0) / (x1 - x0) * (W - LEFT - RIGHT)

    def sy(v):
        return H - BOTTOM - (v - y0) / (y1 - y0) * (H - TOP - BOTTOM)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<line x1="{LEFT}" y1="{H - BOTTOM}" x2="{W - RIGHT}" y2="{H - BOTTOM}" stroke="black"/>',
           f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{H - BOTTOM}" stroke="black"/>']
    for v in _ticks(x0, x1, logx):
        if x0 <= v <= x1:
            out.append(f'<line x1="{sx(v):.2f}" y1="{H - BOTTOM}" x2="{sx(v):.2f}" '
                       f'y2="{H - BOTTOM + 5}" stroke="black"/>')
            out.append(f'<text x="{sx(v):.2f}" y="{H - BOTTOM + 18}" '
                       f'text-anchor="middle">{_fmt(v, logx)}</text>')
    for v in _ticks(y0, y1, logy):
        if y0 <= v <= y1:
            out.append(f'<line x1="{LEFT - 5}" y1="{sy(v):.2f}" x2="{LEFT}" '
                       f'y2="{sy(v):.2f}" stroke="black"/>')
            out.append(f'<text x="{LEFT - 8}" y="{sy(v) + 4:.2f}" '
                       f'text-anchor="end">{_fmt(v, logy)}</text>')
    out.append(f'<text x="{(LEFT + W - RIGHT) / 2}" y="{H - 15}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="18" y="{(TOP + H - BOTTOM) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {(TOP + H - BOTTOM) / 2})">{ylabel}</text>')
    if title:
        out.append(f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{title}</text>')
    for i, (label, xs, ys) in enumerate(pts):
        color = _COLORS[i % len(_COLORS)]
        if len(xs) > 1:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        if len(xs) <= 60:
            for x, y in zip(xs, ys):
                out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        if label:
            out.append(f'<text x="{W - RIGHT - 10}" y="{TOP + 16 * (i + 1)}" '
                       f'text-anchor="end" fill="{color}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_csv(csv_path, svg_path, xcol, ycols, **kwargs):
    """Read columns from ``csv_path`` and write an SVG to ``svg_path``."""
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))
    xs = [float(r[xcol]) for r in rows]
    series = [(c, xs, [float(r[c]) for r in rows]) for c in ycols]
    with open(svg_path, "w") as fh:
        fh.write(line_plot(series, **kwargs))
