"""Hand-written SVG for meta-diagrams and signed barcodes.

Output is deterministic: cells, bars and rectangles are emitted in sorted
order and numbers are printed with a fixed precision.
"""
from __future__ import annotations

import math
from typing import Sequence

from .bifiltration import GradeMap
from .signed import MetaDiagram, RankDecomposition

SIZE = 480.0
MARGIN = 48.0
GLYPH = 24.0
POS_COLOR = "#d62728"
NEG_COLOR = "#1f77b4"
MAX_STROKES = 3


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Axis:
    """Affine map from grade values (with a slot for +inf) onto [lo_px, hi_px]."""

    def __init__(self, values: Sequence[float], lo_px: float, hi_px: float):
        finite = [v for v in values if math.isfinite(v)]
        self.vmin = min(finite) if finite else 0.0
        vmax = max(finite) if finite else 1.0
        span = vmax - self.vmin or 1.0
        self.vinf = vmax + 0.15 * span
        self.vmax = vmax
        self.lo_px, self.hi_px = lo_px, hi_px
        self.scale = (hi_px - lo_px) / (self.vinf - self.vmin)

    def __call__(self, v: float) -> float:
        if not math.isfinite(v):
            v = self.vinf
        return self.lo_px + (v - self.vmin) * self.scale


def _svg(body: list[str], title: str) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(SIZE)}" height="{_f(SIZE)}" '
            f'viewBox="0 0 {_f(SIZE)} {_f(SIZE)}">')
    return "\n".join([head, f"<title>{title}</title>", '<rect width="100%" height="100%" fill="white"/>']
                     + body + ["</svg>", ""])


def _axes(ax: _Axis, ay: _Axis, xlabel: str, ylabel: str) -> list[str]:
    x0, y0 = ax.lo_px, ay.lo_px
    out = [
        '<g class="axes" stroke="black" stroke-width="1" fill="none">',
        f'<line x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(ax(math.inf))}" y2="{_f(y0)}"/>',
        f'<line x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(x0)}" y2="{_f(ay(math.inf))}"/>',
        "</g>",
        '<g class="labels" font-family="sans-serif" font-size="10" fill="black">',
        f'<text x="{_f(ax(math.inf))}" y="{_f(y0 + 14)}" text-anchor="middle">inf</text>',
        f'<text x="{_f(x0 - 6)}" y="{_f(ay(math.inf) + 3)}" text-anchor="end">inf</text>',
        f'<text x="{_f(ax(ax.vmin))}" y="{_f(y0 + 14)}" text-anchor="middle">{ax.vmin:g}</text>',
        f'<text x="{_f(ax(ax.vmax))}" y="{_f(y0 + 14)}" text-anchor="middle">{ax.vmax:g}</text>',
        f'<text x="{_f(x0 - 6)}" y="{_f(ay(ay.vmin) + 3)}" text-anchor="end">{ay.vmin:g}</text>',
        f'<text x="{_f(x0 - 6)}" y="{_f(ay(ay.vmax) + 3)}" text-anchor="end">{ay.vmax:g}</text>',
        f'<text x="{_f((ax.lo_px + ax.hi_px) / 2)}" y="{_f(SIZE - 8)}" text-anchor="middle">{xlabel}</text>',
        f'<text x="12" y="{_f((ay.lo_px + ay.hi_px) / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 12 {_f((ay.lo_px + ay.hi_px) / 2)})">{ylabel}</text>',
        "</g>",
    ]
    return out


def render_diagram_of_diagrams(mdgm: MetaDiagram, gmap: GradeMap, dim: int) -> str:
    """One glyph per non-zero cell (s, t), placed at (x_s, x_{t+1}) above the diagonal.

    A glyph is a mini-barcode in a 24-unit box: one horizontal segment per
    distinct signed bar, red for positive and blue for negative, stroke
    width growing with multiplicity up to three.
    """
    xs = list(gmap.values("x"))
    ys = list(gmap.values("y"))
    n = len(xs)
    ax = _Axis(xs, MARGIN, SIZE - MARGIN / 2)
    ay = _Axis(xs, SIZE - MARGIN, MARGIN / 2)  # flipped: larger t higher up
    by = _Axis(ys, 0.0, GLYPH)
    body = _axes(ax, ay, "s", "t")
    lo, hi = ax(ax.vmin), ax(math.inf)
    body.append(f'<line class="diagonal" x1="{_f(lo)}" y1="{_f(ay(ax.vmin))}" x2="{_f(hi)}" '
                f'y2="{_f(ay(math.inf))}" stroke="#999999" stroke-dasharray="4 3"/>')
    for (s, t), sb in sorted(mdgm.cells.get(dim, {}).items()):
        if not sb:
            continue
        sx = xs[s - 1]
        tx = xs[t] if t < n else math.inf
        cx, cy = ax(sx), ay(tx)
        items = sorted(sb.items())
        step = GLYPH / (len(items) + 1)
        body.append(f'<g class="glyph" data-cell="{s},{t}" transform="translate({_f(cx - GLYPH / 2)},{_f(cy - GLYPH / 2)})">')
        body.append(f'<rect width="{_f(GLYPH)}" height="{_f(GLYPH)}" fill="white" stroke="#cccccc" stroke-width="0.5"/>')
        for k, ((blo, bhi), mult) in enumerate(items, start=1):
            y0 = ys[blo - 1]
            y1 = ys[bhi] if bhi < n else math.inf
            color = POS_COLOR if mult > 0 else NEG_COLOR
            width = min(abs(mult), MAX_STROKES)
            body.append(f'<line class="bar" x1="{_f(by(y0))}" y1="{_f(k * step)}" x2="{_f(by(y1))}" '
                        f'y2="{_f(k * step)}" stroke="{color}" stroke-width="{width}"/>')
        body.append("</g>")
    return _svg(body, f"meta-diagram, degree {dim}")


def render_signed_barcode(rd: RankDecomposition, gmap: GradeMap, dim: int = 0) -> str:
    """Each rectangle [s, t] x [lo, hi] drawn as its diagonal, red for R and blue for S.

    A rectangle of multiplicity m is drawn with m parallel strokes.
    """
    xs = list(gmap.values("x"))
    ys = list(gmap.values("y"))
    n = len(xs)
    ax = _Axis(xs, MARGIN, SIZE - MARGIN / 2)
    ay = _Axis(ys, SIZE - MARGIN, MARGIN / 2)
    body = _axes(ax, ay, "x", "y")
    for cls, color, rects in (("positive", POS_COLOR, rd.R), ("negative", NEG_COLOR, rd.S)):
        for (s, t, lo, hi), mult in sorted(rects.items()):
            x0, x1 = ax(xs[s - 1]), ax(xs[t] if t < n else math.inf)
            y0, y1 = ay(ys[lo - 1]), ay(ys[hi] if hi < n else math.inf)
            body.append(f'<g class="rectangle {cls}" data-rect="{s},{t},{lo},{hi}" stroke="{color}" stroke-width="1">')
            for k in range(mult):
                off = 2.0 * k
                body.append(f'<line x1="{_f(x0 + off)}" y1="{_f(y0)}" x2="{_f(x1 + off)}" y2="{_f(y1)}"/>')
            body.append(f'<circle cx="{_f(x0)}" cy="{_f(y0)}" r="1.5" fill="{color}" stroke="none"/>')
            body.append("</g>")
    return _svg(body, f"signed barcode, degree {dim}")
