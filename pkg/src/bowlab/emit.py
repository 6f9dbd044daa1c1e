"""TikZ and SVG renderings of tie diagrams, butterflies and curve graphs.

Output is plain text with fixed float formatting, so it is stable for a
fixed input and can be compared against golden files.
"""
from __future__ import annotations

from typing import Callable

from .algebra import UsageError
from .diagram import NS5, BraneDiagram
from .envelope import CurveGraph, Weight, order_and_slope
from .fixedpoints import Butterfly, TieDiagram

KINDS = ("tie", "butterfly", "gkm")
FORMATS = ("tikz", "svg")

_NS5_COLOR = "red"
_D5_COLOR = "blue"
_PX = 24  # svg pixels per unit


def _f(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _tikz_doc(body: list[str], scale: float = 0.5) -> str:
    lines = [
        r"\documentclass[tikz]{standalone}",
        r"\begin{document}",
        rf"\begin{{tikzpicture}}[scale={_f(scale)}]",
        *body,
        r"\end{tikzpicture}",
        r"\end{document}",
    ]
    return "\n".join(lines) + "\n"


class _Svg:
    """Collects primitives in user units and flips y on output."""

    def __init__(self):
        self.items: list[tuple] = []
        self.xs: list[float] = []
        self.ys: list[float] = []

    def _touch(self, *pts):
        for x, y in pts:
            self.xs.append(x)
            self.ys.append(y)

    def line(self, a, b, color="black", width=1.5, dashed=False, arrow=False):
        self._touch(a, b)
        self.items.append(("line", a, b, color, width, dashed, arrow))

    def arc(self, a, b, bend, color="black"):
        mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2 + bend)
        self._touch(a, b, mid)
        self.items.append(("arc", a, b, mid, color))

    def dot(self, p, r=0.15, color="black"):
        self._touch((p[0] - r, p[1] - r), (p[0] + r, p[1] + r))
        self.items.append(("dot", p, r, color))

    def text(self, p, s, size=10):
        self._touch(p)
        self.items.append(("text", p, s, size))

    def render(self) -> str:
        pad = 1.0
        x0, x1 = min(self.xs, default=0) - pad, max(self.xs, default=0) + pad
        y0, y1 = min(self.ys, default=0) - pad, max(self.ys, default=0) + pad
        X = lambda x: _f((x - x0) * _PX)
        Y = lambda y: _f((y1 - y) * _PX)
        w, h = _f((x1 - x0) * _PX), _f((y1 - y0) * _PX)
        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
            '<defs><marker id="arr" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" '
            'markerHeight="6" orient="auto"><path d="M0,0 L10,5 L0,10 z"/></marker></defs>',
        ]
        for it in self.items:
            kind = it[0]
            if kind == "line":
                _, a, b, color, width, dashed, arrow = it
                extra = ' stroke-dasharray="4,3"' if dashed else ""
                if arrow:
                    extra += ' marker-end="url(#arr)"'
                out.append(
                    f'<line x1="{X(a[0])}" y1="{Y(a[1])}" x2="{X(b[0])}" y2="{Y(b[1])}" '
                    f'stroke="{color}" stroke-width="{_f(width)}"{extra}/>'
                )
            elif kind == "arc":
                _, a, b, mid, color = it
                out.append(
                    f'<path d="M{X(a[0])},{Y(a[1])} Q{X(mid[0])},{Y(mid[1])} {X(b[0])},{Y(b[1])}" '
                    f'fill="none" stroke="{color}" stroke-dasharray="4,3"/>'
                )
            elif kind == "dot":
                _, p, r, color = it
                out.append(f'<circle cx="{X(p[0])}" cy="{Y(p[1])}" r="{_f(r * _PX)}" fill="{color}" stroke="black"/>')
            else:
                _, p, s, size = it
                s = s.replace("&", "&amp;").replace("<", "&lt;")
                out.append(
                    f'<text x="{X(p[0])}" y="{Y(p[1])}" font-size="{size}" text-anchor="middle">{s}</text>'
                )
        out.append("</svg>")
        return "\n".join(out) + "\n"


# tie diagrams

_STEP = 3.0


def _brane_x(k: int) -> float:
    return _STEP * k


def _brane_line(D: BraneDiagram):
    """Yields (kind, payload) primitives of the bare brane diagram."""
    for k, b in enumerate(D.branes):
        x = _brane_x(k)
        if b == NS5:
            yield "line", ((x - 0.5, 0), (x + 0.5, 2), _NS5_COLOR)
        else:
            yield "line", ((x + 0.5, 0), (x - 0.5, 2), _D5_COLOR)
    for k, d in enumerate(D.d3):
        if k == 0 or k == len(D.branes):
            continue
        xa, xb = _brane_x(k - 1), _brane_x(k)
        yield "line", ((xa, 1), (xb, 1), "black")
        yield "text", (((xa + xb) / 2, 1.3), str(d))


def _tie_arcs(td: TieDiagram):
    D = td.diagram
    ns5, d5 = D.ns5_positions(), D.d5_positions()
    for i, j in td.sorted_ties():
        p, q = ns5[i - 1], d5[j - 1]
        if p < q:  # NS5 on the left: arc over the top ends
            yield (_brane_x(p) + 0.5, 2.2), (_brane_x(q) - 0.5, 2.2), 1
        else:
            yield (_brane_x(q) + 0.5, -0.2), (_brane_x(p) - 0.5, -0.2), -1


def emit_tie(td: TieDiagram, fmt: str) -> str:
    if fmt == "tikz":
        body = []
        for kind, payload in _brane_line(td.diagram):
            if kind == "line":
                a, b, color = payload
                body.append(rf"\draw[thick,{color}] ({_f(a[0])},{_f(a[1])}) -- ({_f(b[0])},{_f(b[1])});")
            else:
                p, s = payload
                body.append(rf"\node at ({_f(p[0])},{_f(p[1])}) {{\tiny ${s}$}};")
        for a, b, side in _tie_arcs(td):
            out_, in_ = (45, 135) if side > 0 else (-45, -135)
            body.append(
                rf"\draw[dashed] ({_f(a[0])},{_f(a[1])}) to[out={out_},in={in_}] ({_f(b[0])},{_f(b[1])});"
            )
        return _tikz_doc(body, 0.45)
    svg = _Svg()
    for kind, payload in _brane_line(td.diagram):
        if kind == "line":
            a, b, color = payload
            svg.line(a, b, color)
        else:
            svg.text(*payload)
    for a, b, side in _tie_arcs(td):
        svg.arc(a, b, side * (0.4 + 0.08 * abs(b[0] - a[0])))
    return svg.render()


# butterflies

_ARROW_STYLE = {"A": "black", "B": "black", "C": _NS5_COLOR, "D": _NS5_COLOR}


def emit_butterfly(bfs: list[Butterfly], fmt: str) -> str:
    """All butterflies of a fixed point side by side, one dot per basis vector."""
    placed = []  # (butterfly, x offset)
    offset = 0.0
    for bf in bfs:
        slots = sorted(bf.columns)
        placed.append((bf, offset - slots[0]))
        offset += len(slots) + 1.5
    tikz, svg = [], _Svg()
    for bf, dx in placed:
        xs = sorted(bf.columns)
        low = min(b for b, _ in bf.columns.values())
        label = (dx + (xs[0] + xs[-1]) / 2, low - 1)
        if fmt == "tikz":
            tikz.append(rf"\node at ({_f(label[0])},{_f(label[1])}) {{\tiny $U_{{{bf.d5}}}$}};")
        else:
            svg.text(label, f"U{bf.d5}")
        for kind, (sa, ha), (sb, hb) in bf.arrows:
            a, b = (sa + dx, ha), (sb + dx, hb)
            if fmt == "tikz":
                tikz.append(
                    rf"\draw[->,{_ARROW_STYLE[kind]}] ({_f(a[0])},{_f(a[1])}) -- ({_f(b[0])},{_f(b[1])});"
                )
            else:
                svg.line(a, b, _ARROW_STYLE[kind], 1, arrow=True)
        marked = {bf.a_dot: "a", bf.b_dot: "b"}
        for slot, hgt in bf.dots():
            p = (slot + dx, hgt)
            color = _D5_COLOR if (slot, hgt) in marked else "black"
            if fmt == "tikz":
                tikz.append(rf"\fill[{color}] ({_f(p[0])},{_f(p[1])}) circle (0.12);")
            else:
                svg.dot(p, 0.12, color)
    if fmt == "tikz":
        return _tikz_doc(tikz, 0.6)
    return svg.render()


# curve graphs


def _weight_label(w: Weight) -> str:
    parts = []
    if w.num:
        parts.append(f"u{w.num}-u{w.den}")
    if w.h:
        coef = "" if abs(w.h) == 1 else str(abs(w.h))
        sign = "-" if w.h < 0 else ("+" if parts else "")
        parts.append(f"{sign}{coef}h")
    return "".join(parts) or "0"


def _gkm_layout(g: CurveGraph) -> dict[str, tuple[float, float]]:
    try:
        order = order_and_slope(g)
        rank = {v: len(order.below[v]) for v in g.vertices}
    except Exception:
        rank = {v: 0 for v in g.vertices}
    levels: dict[int, list[str]] = {}
    for v in g.vertices:
        levels.setdefault(rank[v], []).append(v)
    pos = {}
    for y, key in enumerate(sorted(levels)):
        row = levels[key]
        for i, v in enumerate(row):
            pos[v] = (3.0 * (i - (len(row) - 1) / 2), 2.5 * y)
    return pos


def emit_gkm(g: CurveGraph, fmt: str) -> str:
    pos = _gkm_layout(g)
    tikz, svg = [], _Svg()
    for a, b, wa, wb in g.edges:
        (xa, ya), (xb, yb) = pos[a], pos[b]
        la = (xa + 0.3 * (xb - xa), ya + 0.3 * (yb - ya))
        lb = (xb + 0.3 * (xa - xb), yb + 0.3 * (ya - yb))
        if fmt == "tikz":
            tikz.append(rf"\draw ({_f(xa)},{_f(ya)}) -- ({_f(xb)},{_f(yb)});")
            tikz.append(rf"\node[fill=white,inner sep=1pt] at ({_f(la[0])},{_f(la[1])}) {{\tiny ${_weight_label(wa)}$}};")
            tikz.append(rf"\node[fill=white,inner sep=1pt] at ({_f(lb[0])},{_f(lb[1])}) {{\tiny ${_weight_label(wb)}$}};")
        else:
            svg.line((xa, ya), (xb, yb))
            svg.text(la, _weight_label(wa), 8)
            svg.text(lb, _weight_label(wb), 8)
    for v in g.vertices:
        x, y = pos[v]
        if fmt == "tikz":
            tikz.append(rf"\node[circle,draw,fill=white,inner sep=1pt] at ({_f(x)},{_f(y)}) {{\tiny {v}}};")
        else:
            svg.dot((x, y), 0.35, "white")
            svg.text((x, y - 0.12), v, 9)
    if fmt == "tikz":
        return _tikz_doc(tikz, 1.0)
    return svg.render()


_EMITTERS: dict[str, Callable] = {"tie": emit_tie, "butterfly": emit_butterfly, "gkm": emit_gkm}


def emit_diagram(kind: str, data, fmt: str) -> str:
    if kind not in _EMITTERS:
        raise UsageError(f"unknown emit kind {kind!r}")
    if fmt not in FORMATS:
        raise UsageError(f"unknown emit format {fmt!r}")
    return _EMITTERS[kind](data, fmt)
