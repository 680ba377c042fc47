"""Dependency-free SVG line charts for loss curves and probability fits.

Output is deterministic: no timestamps, fixed float formatting.
"""

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, n)


def line_chart_svg(series, title="", xlabel="", ylabel="", width=640, height=400, ylim=None,
                   steps=()):
    """SVG document for ``series``: a mapping name -> (x, y).

    Names listed in ``steps`` are drawn as step functions (used for 0/1 truth).
    """
    if not series:
        raise ValueError("nothing to plot")
    ml, mr, mt, mb = 64, 150, 36, 48
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, y in series.values()])
    ys = ys[np.isfinite(ys)]
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = ylim if ylim is not None else (float(ys.min()), float(ys.max()))
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{ml + pw / 2:.1f}" y="20" text-anchor="middle" font-size="14">'
           f'{escape(title)}</text>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for v in _ticks(x0, x1):
        out.append(f'<line x1="{px(v):.1f}" y1="{mt + ph}" x2="{px(v):.1f}" y2="{mt + ph + 4}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{px(v):.1f}" y="{mt + ph + 16}" text-anchor="middle">{v:.4g}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<line x1="{ml - 4}" y1="{py(v):.1f}" x2="{ml}" y2="{py(v):.1f}" stroke="black"/>')
        out.append(f'<text x="{ml - 6}" y="{py(v) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {mt + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (name, (x, y)) in enumerate(series.items()):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        color = PALETTE[i % len(PALETTE)]
        if name in steps and x.size > 1:
            x, y = np.repeat(x, 2)[1:], np.repeat(y, 2)[:-1]
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = mt + 14 + 16 * i
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly - 4}" x2="{ml + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 34}" y="{ly}">{escape(str(name))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def loss_chart(histories, which="both", title="loss"):
    """Chart for one :class:`TrainingHistory` or a mapping name -> history."""
    if not isinstance(histories, dict):
        histories = {"": histories}
    series = {}
    for name, h in histories.items():
        tag = f"{name} " if name else ""
        if which in ("both", "train"):
            series[f"{tag}train"] = (h.epochs, h.train_loss)
        if which in ("both", "test"):
            series[f"{tag}test"] = (h.epochs, h.test_loss)
    return line_chart_svg(series, title, "epoch", "loss")


def fit_chart(steps, predictions, truth, title="probability fit"):
    return line_chart_svg({"prediction": (steps, predictions), "truth": (steps, truth)},
                          title, "step", "probability", ylim=(-0.05, 1.05), steps=("truth",))


def write_svg(path, svg):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return path
