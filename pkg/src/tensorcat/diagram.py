"""String-diagram layout and SVG rendering of roger terms.

Diagrams read left to right.  Sequential composition juxtaposes blocks
horizontally, the tensor product stacks them vertically.  Every wire is
one atomic factor of an object; wires of the unit object are drawn gray
and wires of dual objects carry a reversed arrowhead.  η and ε become
bends, σ a crossing; generators are boxes, with dedicated glyphs for the
metric (lens), the antisymmetrizer (thick bar) and derivative frames.

The layout keeps enough structure to recover its wiring graph
(:func:`wiring_graph`), which is how fidelity to the source term is tested.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from tensorcat import roger as R
from tensorcat.objects import UNIT, Dual, Prod

GLYPHS = ("box", "wire", "crossing", "bend-left", "bend-right", "unit-wire",
          "deriv-frame", "antisym-bar", "metric-lens", "sum", "scalar")

# cell kinds that are drawn wires rather than graph vertices
PASS_THROUGH = {"wire", "unit-wire", "crossing", "bend-left", "bend-right"}


def _leaves(o):
    if isinstance(o, Prod):
        return _leaves(o.left) + _leaves(o.right)
    return [o]


@dataclass
class Cell:
    kind: str
    label: str
    x: float
    y: float
    w: float
    h: float
    left: list  # y offsets of left anchors (relative to cell top)
    right: list
    left_unit: list = field(default_factory=list)
    right_unit: list = field(default_factory=list)
    left_dual: list = field(default_factory=list)
    right_dual: list = field(default_factory=list)
    # pass-through connectivity: pairs of (side, k) anchors joined inside the cell
    links: list = field(default_factory=list)
    inner: list = field(default_factory=list)  # decorative sub-layouts
    text: str = ""


@dataclass
class Wire:
    a: tuple  # ("cell", index, side, k) or ("L"/"R", k)
    b: tuple
    unit: bool
    dual: bool


@dataclass
class Layout:
    cells: list
    wires: list
    width: float
    height: float
    left: list  # y of boundary anchors
    right: list

    @property
    def layers(self):
        """Cells grouped into columns by x position, left to right."""
        cols = {}
        for c in self.cells:
            cols.setdefault(round(c.x, 6), []).append(c)
        return [sorted(cols[x], key=lambda c: c.y) for x in sorted(cols)]


@dataclass
class _Block:
    cells: list
    wires: list
    w: float
    h: float
    left: list  # anchor refs ("cell", idx, "l", k)
    right: list
    left_objs: list
    right_objs: list


def _anchor_y(n, h):
    return [(k + 0.5) * h / n for k in range(n)]


def _cell_block(kind, label, dom, cod, w=1.0, links=(), min_h=1.0, text="", inner=()):
    lo, ro = _leaves(dom), _leaves(cod)
    h = max(len(lo), len(ro), min_h)
    cell = Cell(kind, label, 0.0, 0.0, w, h, _anchor_y(len(lo), h), _anchor_y(len(ro), h),
                [o == UNIT for o in lo], [o == UNIT for o in ro],
                [isinstance(o, Dual) for o in lo], [isinstance(o, Dual) for o in ro],
                list(links), list(inner), text)
    return _Block([cell], [], w, h,
                  [("cell", 0, "l", k) for k in range(len(lo))],
                  [("cell", 0, "r", k) for k in range(len(ro))], lo, ro)


def _shift(block: _Block, dx, dy, base):
    cells = [dataclasses.replace(c, x=c.x + dx, y=c.y + dy) for c in block.cells]

    def ref(r):
        return ("cell", r[1] + base, r[2], r[3]) if r[0] == "cell" else r

    wires = [Wire(ref(w.a), ref(w.b), w.unit, w.dual) for w in block.wires]
    return cells, wires, [ref(r) for r in block.left], [ref(r) for r in block.right]


def _lane_links(n):
    return [(("l", k), ("r", k)) for k in range(n)]


def _block(t: R.Term) -> _Block:
    if isinstance(t, (R.Id, R.Alpha, R.AlphaInv)):
        n = len(_leaves(t.dom))
        kind = "unit-wire" if t.dom == UNIT else "wire"
        return _cell_block(kind, "", t.dom, t.cod, links=_lane_links(n))
    if isinstance(t, R.RhoIntro):
        n = len(_leaves(t.a))
        return _cell_block("wire", "ρ", t.dom, t.cod, links=_lane_links(n))
    if isinstance(t, R.RhoElim):
        n = len(_leaves(t.a))
        return _cell_block("wire", "ρ̄", t.dom, t.cod, links=_lane_links(n))
    if isinstance(t, R.Sigma):
        na, nb = len(_leaves(t.a)), len(_leaves(t.b))
        links = [(("l", k), ("r", nb + k)) for k in range(na)]
        links += [(("l", na + k), ("r", k)) for k in range(nb)]
        return _cell_block("crossing", "σ", t.dom, t.cod, links=links)
    if isinstance(t, R.Eta):
        n = len(_leaves(t.a))
        return _cell_block("bend-left", "η", t.dom, t.cod, links=[(("r", k), ("r", n + k)) for k in range(n)])
    if isinstance(t, R.Eps):
        n = len(_leaves(t.a))
        return _cell_block("bend-right", "ε", t.dom, t.cod, links=[(("l", k), ("l", n + k)) for k in range(n)])
    if isinstance(t, R.Prim):
        glyph = t.meta.get("glyph")
        if glyph == "metric":
            return _cell_block("metric-lens", t.name, t.dom, t.cod)
        if glyph == "antisym":
            return _cell_block("antisym-bar", t.name, t.dom, t.cod, w=0.6)
        if glyph == "deriv":
            body = t.meta.get("body")
            inner = [layout(body)] if body is not None else []
            w = max(2.0, inner[0].width + 1.0) if inner else 2.0
            h = max(inner[0].height + 0.6, 1.0) if inner else 1.0
            return _cell_block("deriv-frame", t.name, t.dom, t.cod, w=w, min_h=h, inner=inner)
        return _cell_block("box", t.name, t.dom, t.cod, w=1.6)
    if isinstance(t, R.ZeroM):
        return _cell_block("box", "0", t.dom, t.cod, w=1.6)
    if isinstance(t, R.Sum):
        inner = [layout(x) for x in t.terms]
        w = sum(l.width for l in inner) + 1.0 * (len(inner) - 1) + 1.0
        h = max(l.height for l in inner) + 0.6
        return _cell_block("sum", "+", t.dom, t.cod, w=w, min_h=h, inner=inner)
    if isinstance(t, R.Scale):
        inner = _block(t.t)
        scalar = _cell_block("scalar", str(t.s), UNIT, UNIT, w=1.6)
        scalar.cells[0].left, scalar.cells[0].right = [], []
        scalar.cells[0].left_unit = scalar.cells[0].right_unit = []
        scalar.cells[0].left_dual = scalar.cells[0].right_dual = []
        c1, w1, l1, r1 = _shift(scalar, 0.0, 0.0, 0)
        c2, w2, l2, r2 = _shift(inner, 0.0, 1.0, len(c1))
        return _Block(c1 + c2, w1 + w2, max(inner.w, 1.6), inner.h + 1.0, l2, r2,
                      inner.left_objs, inner.right_objs)
    if isinstance(t, R.Comp):
        f, g = _block(t.f), _block(t.g)
        h = max(f.h, g.h)
        gap = 0.8
        cf, wf, lf, rf = _shift(f, 0.0, (h - f.h) / 2, 0)
        cg, wg, lg, rg = _shift(g, f.w + gap, (h - g.h) / 2, len(cf))
        joins = [Wire(a, b, o == UNIT, isinstance(o, Dual)) for a, b, o in zip(rf, lg, f.right_objs)]
        return _Block(cf + cg, wf + wg + joins, f.w + gap + g.w, h, lf, rg, f.left_objs, g.right_objs)
    if isinstance(t, R.Ten):
        a, b = _block(t.left), _block(t.right)
        ca, wa, la, ra = _shift(a, 0.0, 0.0, 0)
        cb, wb, lb, rb = _shift(b, 0.0, a.h, len(ca))
        return _Block(ca + cb, wa + wb, max(a.w, b.w), a.h + b.h, la + lb, ra + rb,
                      a.left_objs + b.left_objs, a.right_objs + b.right_objs)
    raise TypeError(f"not a term: {t!r}")


def layout(t: R.Term) -> Layout:
    """Place a term on a grid; pure and deterministic."""
    b = _block(t)
    margin = 0.8
    cells, wires, left, right = _shift(b, margin, 0.0, 0)
    for k, (ref, o) in enumerate(zip(left, b.left_objs)):
        wires.append(Wire(("L", k), ref, o == UNIT, isinstance(o, Dual)))
    for k, (ref, o) in enumerate(zip(right, b.right_objs)):
        wires.append(Wire(ref, ("R", k), o == UNIT, isinstance(o, Dual)))
    out = Layout(cells, wires, b.w + 2 * margin, b.h, [], [])
    out.left = [anchor_pos(out, r)[1] for r in left]
    out.right = [anchor_pos(out, r)[1] for r in right]
    return out


def anchor_pos(l: Layout, ref):
    if ref[0] == "L":
        return 0.0, l.left[ref[1]]
    if ref[0] == "R":
        return l.width, l.right[ref[1]]
    c = l.cells[ref[1]]
    if ref[2] == "l":
        return c.x, c.y + c.left[ref[3]]
    return c.x + c.w, c.y + c.right[ref[3]]


# ---------------------------------------------------------------------------
# wiring graph


def wiring_graph(l: Layout):
    """Bipartite multigraph of a layout as ``(nodes, edges)``.

    Nodes are ``(id, label)`` pairs: one per generator cell, one per anchor
    of a generator cell (labelled by side and position), one per boundary
    port and one per connected wire (labelled ``unit`` or ``wire``).
    Pass-through cells (plain wires, crossings, bends) contribute no node;
    they only join wire segments.
    """
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    def key(ref):
        return ref if ref[0] in ("L", "R") else ("cell", ref[1], ref[2], ref[3])

    unit_of = {}
    for w in l.wires:
        union(key(w.a), key(w.b))
        unit_of[key(w.a)] = unit_of[key(w.b)] = w.unit
    for i, c in enumerate(l.cells):
        for side, ys, units in (("l", c.left, c.left_unit), ("r", c.right, c.right_unit)):
            for k in range(len(ys)):
                find(("cell", i, side, k))
                unit_of.setdefault(("cell", i, side, k), bool(units and units[k]))
        if c.kind in PASS_THROUGH:
            for (s1, k1), (s2, k2) in c.links:
                union(("cell", i, s1, k1), ("cell", i, s2, k2))
    nodes, edges = [], []
    for i, c in enumerate(l.cells):
        if c.kind in PASS_THROUGH:
            continue
        nodes.append((("v", i), f"{c.kind}:{c.label}"))
        for side, ys in (("l", c.left), ("r", c.right)):
            for k in range(len(ys)):
                a = ("a", i, side, k)
                nodes.append((a, f"{side}{k}"))
                edges.append((("v", i), a))
                edges.append((a, ("w", find(("cell", i, side, k)))))
    for side, ys in (("L", l.left), ("R", l.right)):
        for k in range(len(ys)):
            nodes.append(((side, k), f"{side}{k}"))
            edges.append(((side, k), ("w", find((side, k)))))
    roots = sorted({find(x) for x in list(parent)}, key=repr)
    for r in roots:
        unit = any(unit_of.get(x, False) for x in parent if find(x) == r)
        nodes.append((("w", r), "unit" if unit else "wire"))
    return nodes, edges


# ---------------------------------------------------------------------------
# SVG


@dataclass(frozen=True)
class StyleConfig:
    unit_px: float = 40.0
    px_per_width: float = 4.0
    wire_width: float = 0.4
    bar_width: float = 1.2
    frame_width: float = 0.8
    box_width: float = 0.4
    font_size: float = 13.0
    font_family: str = "serif"
    wire_color: str = "#000000"
    unit_color: str = "#a0a0a0"
    box_fill: str = "#ffffff"
    metric_fill: str = "#9a9a9a"
    background: str = "#ffffff"

    @classmethod
    def load(cls, path):
        """Read ``key = value`` lines (``#`` starts a comment)."""
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    @classmethod
    def parse(cls, text):
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            k, sep, v = line.partition("=")
            k, v = k.strip(), v.strip()
            if not sep or k not in types:
                raise ValueError(f"style line {lineno}: unknown or malformed entry {raw!r}")
            values[k] = float(v) if types[k] in (float, "float") else v
        return cls(**values)


def _f(x):
    return f"{x:.2f}"


def _esc(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _wire_path(x1, y1, x2, y2):
    if abs(y1 - y2) < 1e-9:
        return f"M{_f(x1)},{_f(y1)} L{_f(x2)},{_f(y2)}"
    mx = (x1 + x2) / 2
    return f"M{_f(x1)},{_f(y1)} C{_f(mx)},{_f(y1)} {_f(mx)},{_f(y2)} {_f(x2)},{_f(y2)}"


def _svg_body(l: Layout, st: StyleConfig, ox, oy, out):
    u = st.unit_px
    ww = st.wire_width * st.px_per_width

    def P(x, y):
        return ox + x * u, oy + y * u

    def stroke(unit):
        return st.unit_color if unit else st.wire_color

    for w in l.wires:
        (x1, y1), (x2, y2) = P(*anchor_pos(l, w.a)), P(*anchor_pos(l, w.b))
        marker = ' marker-mid="url(#rev)"' if w.dual else ""
        if w.dual:
            # split at the midpoint so marker-mid has a vertex to sit on
            mx, my = (x1 + x2) / 2, (y1 + y2) / 2
            d = _wire_path(x1, y1, mx, my) + " " + _wire_path(mx, my, x2, y2)
        else:
            d = _wire_path(x1, y1, x2, y2)
        out.append(f'<path d="{d}" fill="none" stroke="{stroke(w.unit)}" '
                   f'stroke-width="{_f(ww)}"{marker}/>')
    for c in l.cells:
        x, y = P(c.x, c.y)
        w, h = c.w * u, c.h * u
        ly = [y + v * u for v in c.left]
        ry = [y + v * u for v in c.right]
        if c.kind in ("wire", "unit-wire"):
            for (s1, k1), (s2, k2) in c.links:
                unit = c.left_unit[k1] if c.left_unit else c.kind == "unit-wire"
                out.append(f'<path d="{_wire_path(x, ly[k1], x + w, ry[k2])}" fill="none" '
                           f'stroke="{stroke(unit)}" stroke-width="{_f(ww)}"/>')
            for k, yy in enumerate(ry):
                if all(not (s == "r" and kk == k) for _, (s, kk) in c.links):
                    out.append(f'<path d="{_wire_path(x + w / 2, yy, x + w, yy)}" fill="none" '
                               f'stroke="{st.unit_color}" stroke-width="{_f(ww)}"/>')
            for k, yy in enumerate(ly):
                if all(not (s == "l" and kk == k) for (s, kk), _ in c.links):
                    out.append(f'<path d="{_wire_path(x, yy, x + w / 2, yy)}" fill="none" '
                               f'stroke="{st.unit_color}" stroke-width="{_f(ww)}"/>')
        elif c.kind == "crossing":
            for (s1, k1), (s2, k2) in c.links:
                unit = c.left_unit[k1]
                out.append(f'<path d="{_wire_path(x, ly[k1], x + w, ry[k2])}" fill="none" '
                           f'stroke="{stroke(unit)}" stroke-width="{_f(ww)}"/>')
        elif c.kind in ("bend-left", "bend-right"):
            side_y, edge_x = (ry, x + w) if c.kind == "bend-left" else (ly, x)
            other_y, other_x = (ly, x) if c.kind == "bend-left" else (ry, x + w)
            for (_, k1), (_, k2) in c.links:
                y1, y2 = side_y[k1], side_y[k2]
                r = abs(y2 - y1) / 2
                sweep = 0 if c.kind == "bend-left" else 1
                out.append(f'<path d="M{_f(edge_x)},{_f(y1)} A{_f(r)},{_f(r)} 0 0 {sweep} '
                           f'{_f(edge_x)},{_f(y2)}" fill="none" stroke="{st.wire_color}" '
                           f'stroke-width="{_f(ww)}" marker-start="url(#rev)"/>')
            for yy in other_y:
                out.append(f'<path d="{_wire_path(other_x, yy, x + w / 2, yy)}" fill="none" '
                           f'stroke="{st.unit_color}" stroke-width="{_f(ww)}"/>')
        elif c.kind == "metric-lens":
            mx = x + w / 2
            out.append(f'<path d="M{_f(mx)},{_f(y)} Q{_f(x + w * 1.1)},{_f(y + h / 2)} {_f(mx)},{_f(y + h)} '
                       f'Q{_f(x - w * 0.1)},{_f(y + h / 2)} {_f(mx)},{_f(y)} Z" fill="{st.metric_fill}" '
                       f'stroke="{st.wire_color}" stroke-width="{_f(ww)}"/>')
            _stubs(out, x, w, ly, ry, c, st, ww)
            _label(out, mx, y + h / 2, c.label, st)
        elif c.kind == "antisym-bar":
            mx = x + w / 2
            out.append(f'<path d="M{_f(mx)},{_f(y + 0.1 * u)} L{_f(mx)},{_f(y + h - 0.1 * u)}" '
                       f'stroke="{st.wire_color}" stroke-width="{_f(st.bar_width * st.px_per_width)}"/>')
            _stubs(out, x, w, ly, ry, c, st, ww)
        elif c.kind == "scalar":
            out.append(f'<circle cx="{_f(x + w / 2)}" cy="{_f(y + h / 2)}" r="{_f(0.35 * u)}" '
                       f'fill="{st.box_fill}" stroke="{st.wire_color}" stroke-width="{_f(ww)}"/>')
            _label(out, x + w / 2, y + h / 2, c.label, st)
        else:
            rx = ' rx="8"' if c.kind in ("deriv-frame", "sum") else ""
            sw = st.frame_width if c.kind == "deriv-frame" else st.box_width
            out.append(f'<rect x="{_f(x + 0.1 * u)}" y="{_f(y + 0.05 * u)}" width="{_f(w - 0.2 * u)}" '
                       f'height="{_f(h - 0.1 * u)}"{rx} fill="{st.box_fill}" stroke="{st.wire_color}" '
                       f'stroke-width="{_f(sw * st.px_per_width)}"/>')
            _stubs(out, x, w, ly, ry, c, st, ww, inset=0.1 * u)
            if c.inner:
                cx = x + 0.5 * u
                for k, sub in enumerate(c.inner):
                    sy = y + (h - sub.height * u) / 2
                    _svg_body(sub, st, cx, sy, out)
                    cx += sub.width * u
                    if c.kind == "sum" and k < len(c.inner) - 1:
                        _label(out, cx + 0.5 * u, y + h / 2, "+", st)
                        cx += 1.0 * u
                if c.kind == "deriv-frame":
                    _label(out, x + 0.3 * u, y + 0.3 * u, c.label, st)
            else:
                _label(out, x + w / 2, y + h / 2, c.label, st)


def _stubs(out, x, w, ly, ry, c, st, ww, inset=0.0):
    for k, yy in enumerate(ly):
        col = st.unit_color if c.left_unit and c.left_unit[k] else st.wire_color
        out.append(f'<path d="M{_f(x)},{_f(yy)} L{_f(x + inset)},{_f(yy)}" stroke="{col}" '
                   f'stroke-width="{_f(ww)}"/>')
    for k, yy in enumerate(ry):
        col = st.unit_color if c.right_unit and c.right_unit[k] else st.wire_color
        out.append(f'<path d="M{_f(x + w - inset)},{_f(yy)} L{_f(x + w)},{_f(yy)}" stroke="{col}" '
                   f'stroke-width="{_f(ww)}"/>')


def _label(out, x, y, text, st):
    if text:
        out.append(f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="middle" dominant-baseline="central" '
                   f'font-size="{_f(st.font_size)}" font-family="{_esc(st.font_family)}">'
                   f"{_esc(text)}</text>")


def to_svg(l: Layout, style: StyleConfig | None = None) -> bytes:
    """SVG 1.1 document; byte-identical for identical inputs."""
    st = style or StyleConfig()
    u = st.unit_px
    W, H = l.width * u, max(l.height, 1.0) * u
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(W)}" height="{_f(H)}" '
        f'viewBox="0 0 {_f(W)} {_f(H)}">',
        '<defs><marker id="rev" viewBox="0 0 10 10" refX="5" refY="5" markerWidth="6" '
        'markerHeight="6" orient="auto"><path d="M10,0 L0,5 L10,10 z" fill="#000000"/></marker></defs>',
        f'<rect x="0" y="0" width="{_f(W)}" height="{_f(H)}" fill="{st.background}"/>',
    ]
    _svg_body(l, st, 0.0, 0.0, out)
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def render(t: R.Term, style: StyleConfig | None = None) -> bytes:
    return to_svg(layout(t), style)
