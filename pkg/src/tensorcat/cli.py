"""Command-line driver and the s-expression tensor language.

Grammar::

    expr := (tensor NAME idx*) | (delta idx idx) | (mul expr expr)
          | (plus expr expr+) | (scale RATIONAL expr) | (contract IDENT expr)
          | (deriv idx expr) | (partial idx expr) | (zero idx*) | (const SCALAR)
    idx  := ^IDENT | _IDENT | (raise _IDENT) | (lower ^IDENT)

``^i`` is a contravariant index (a port over ``T*``), ``_i`` a covariant one
(over ``T``).  ``(lower ^i)`` fills a covariant slot with the external upper
index ``^i``; ``(raise _i)`` is the mirror image.  ``SCALAR`` is a bare
token or a double-quoted scalar expression such as ``"-log(rho)"``.
``;`` starts a comment.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from tensorcat import albert as A
from tensorcat import geometry as G
from tensorcat import roger as R
from tensorcat import scalar as S
from tensorcat.errors import (
    EvalSingular, ParseError, ReboundIndex, SamplingExhausted, SignatureMismatch,
    TensorCatError, TypeMismatch, UnboundIndex, UnboundSymbol,
)
from tensorcat.objects import (
    Atom, DualIx, dual, enumerate_indices, lnest, lnest_ix, split_lnest_ix,
)

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_NUMERIC = 0, 2, 3, 4
BUILTINS = ("metric", "cometric", "christoffel", "curvature", "ricci")

# ---------------------------------------------------------------------------
# reader


@dataclass
class _Tok:
    kind: str  # "(" ")" "atom" "str"
    text: str
    line: int
    col: int


def _tokenize(src: str):
    toks = []
    line, col, i = 1, 1, 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == ";":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if ch in "()":
            toks.append(_Tok(ch, ch, line, col))
            i, col = i + 1, col + 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and src[j] != '"':
                if src[j] == "\n":
                    break
                j += 1
            if j >= n or src[j] != '"':
                raise ParseError("unterminated string", line, col)
            toks.append(_Tok("str", src[i + 1:j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        j = i
        while j < n and not src[j].isspace() and src[j] not in '();"':
            j += 1
        toks.append(_Tok("atom", src[i:j], line, col))
        col += j - i
        i = j
    return toks, (line, col)


def read_sexprs(src: str):
    """Nested lists of tokens; raises positioned E_PARSE errors."""
    toks, end = _tokenize(src)
    pos = 0

    def one():
        nonlocal pos
        if pos >= len(toks):
            raise ParseError("unexpected end of input", *end)
        t = toks[pos]
        pos += 1
        if t.kind == ")":
            raise ParseError("unexpected ')'", t.line, t.col)
        if t.kind != "(":
            return t
        items = []
        while True:
            if pos >= len(toks):
                raise ParseError("unclosed '('", t.line, t.col)
            if toks[pos].kind == ")":
                pos += 1
                return (t, items)
            items.append(one())

    out = []
    while pos < len(toks):
        out.append(one())
    return out


# ---------------------------------------------------------------------------
# AST


def _pos():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Idx:
    name: str
    up: bool
    pos: tuple = _pos()


@dataclass(frozen=True)
class Juggle:
    kind: str  # "raise" or "lower"
    idx: Idx
    pos: tuple = _pos()


@dataclass(frozen=True)
class Tensor:
    name: str
    idxs: tuple
    pos: tuple = _pos()


@dataclass(frozen=True)
class Delta:
    a: object
    b: object
    pos: tuple = _pos()


@dataclass(frozen=True)
class Mul:
    a: object
    b: object
    pos: tuple = _pos()


@dataclass(frozen=True)
class Plus:
    terms: tuple
    pos: tuple = _pos()


@dataclass(frozen=True)
class Scale:
    q: Fraction
    e: object
    pos: tuple = _pos()


@dataclass(frozen=True)
class Contract:
    name: str
    e: object
    pos: tuple = _pos()


@dataclass(frozen=True)
class Deriv:
    kind: str  # "deriv" or "partial"
    idx: object
    e: object
    pos: tuple = _pos()


@dataclass(frozen=True)
class Zero:
    sig: tuple
    pos: tuple = _pos()


@dataclass(frozen=True)
class Const:
    value: S.Expr
    pos: tuple = _pos()


def _ident(tok, what, skip=0):
    t = tok.text[skip:]
    if tok.kind != "atom" or not t or not t[0].isalpha() or not all(
            c.isalnum() or c in "_'" for c in t):
        raise ParseError(f"expected {what}, got {t!r}", tok.line, tok.col + skip)
    return t


def _head_pos(x):
    t = x[0] if isinstance(x, tuple) else x
    return (t.line, t.col)


def _parse_idx(x):
    if isinstance(x, tuple):
        open_, items = x
        if not items or items[0].kind != "atom" or items[0].text not in ("raise", "lower"):
            raise ParseError("expected an index, (raise _i) or (lower ^i)", open_.line, open_.col)
        if len(items) != 2 or isinstance(items[1], tuple):
            raise ParseError(f"{items[0].text} takes exactly one index", open_.line, open_.col)
        inner = _parse_idx(items[1])
        return Juggle(items[0].text, inner, (open_.line, open_.col))
    if x.kind != "atom" or len(x.text) < 2 or x.text[0] not in "^_":
        raise ParseError(f"expected an index like ^i or _i, got {x.text!r}", x.line, x.col)
    name = _ident(x, "index name", skip=1)
    return Idx(name, x.text[0] == "^", (x.line, x.col))


def _parse_scalar_tok(tok):
    if tok.kind not in ("atom", "str"):
        raise ParseError("expected a scalar", tok.line, tok.col)
    try:
        return S.parse_scalar(tok.text)
    except ParseError as exc:
        raise ParseError(f"bad scalar {tok.text!r}: {exc}", tok.line, tok.col) from None


def _expr(x):
    if not isinstance(x, tuple):
        raise ParseError(f"expected '(', got {x.text!r}", x.line, x.col)
    open_, items = x
    pos = (open_.line, open_.col)
    if not items or isinstance(items[0], tuple) or items[0].kind != "atom":
        raise ParseError("expected an operator after '('", *pos)
    head, args = items[0].text, items[1:]

    def arity(n, at_least=False):
        if (len(args) < n) if at_least else (len(args) != n):
            need = f"at least {n}" if at_least else str(n)
            raise ParseError(f"{head} takes {need} argument(s), got {len(args)}", *pos)

    if head == "tensor":
        arity(1, True)
        if isinstance(args[0], tuple):
            raise ParseError("expected a tensor name", *_head_pos(args[0]))
        return Tensor(_ident(args[0], "tensor name"), tuple(_parse_idx(a) for a in args[1:]), pos)
    if head == "delta":
        arity(2)
        return Delta(_parse_idx(args[0]), _parse_idx(args[1]), pos)
    if head == "mul":
        arity(2)
        return Mul(_expr(args[0]), _expr(args[1]), pos)
    if head == "plus":
        arity(2, True)
        return Plus(tuple(_expr(a) for a in args), pos)
    if head == "scale":
        arity(2)
        tok = args[0]
        if isinstance(tok, tuple) or tok.kind != "atom":
            raise ParseError("expected a rational", *_head_pos(tok))
        try:
            q = Fraction(tok.text)
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"expected a rational, got {tok.text!r}", tok.line, tok.col) from None
        return Scale(q, _expr(args[1]), pos)
    if head == "contract":
        arity(2)
        if isinstance(args[0], tuple):
            raise ParseError("contract binds a bare identifier", *_head_pos(args[0]))
        return Contract(_ident(args[0], "index name"), _expr(args[1]), pos)
    if head in ("deriv", "partial"):
        arity(2)
        return Deriv(head, _parse_idx(args[0]), _expr(args[1]), pos)
    if head == "zero":
        return Zero(tuple(_parse_idx(a) for a in args), pos)
    if head == "const":
        arity(1)
        if isinstance(args[0], tuple):
            raise ParseError("quote scalars containing parentheses", *_head_pos(args[0]))
        return Const(_parse_scalar_tok(args[0]), pos)
    if head in ("raise", "lower"):
        raise ParseError(f"{head} is only allowed in index positions", *pos)
    raise ParseError(f"unknown operator {head!r}", items[0].line, items[0].col)


def parse(src: str):
    """Parse exactly one expression."""
    forms = read_sexprs(src)
    if not forms:
        raise ParseError("empty input", 1, 1)
    if len(forms) > 1:
        raise ParseError("trailing input after the expression", *_head_pos(forms[1]))
    return _expr(forms[0])


def render_idx(i) -> str:
    if isinstance(i, Juggle):
        return f"({i.kind} {render_idx(i.idx)})"
    return ("^" if i.up else "_") + i.name


def render(e) -> str:
    """Canonical text; ``parse(render(e)) == e``."""
    if isinstance(e, Tensor):
        return "(" + " ".join(["tensor", e.name, *map(render_idx, e.idxs)]) + ")"
    if isinstance(e, Delta):
        return f"(delta {render_idx(e.a)} {render_idx(e.b)})"
    if isinstance(e, Mul):
        return f"(mul {render(e.a)} {render(e.b)})"
    if isinstance(e, Plus):
        return "(plus " + " ".join(map(render, e.terms)) + ")"
    if isinstance(e, Scale):
        return f"(scale {e.q} {render(e.e)})"
    if isinstance(e, Contract):
        return f"(contract {e.name} {render(e.e)})"
    if isinstance(e, Deriv):
        return f"({e.kind} {render_idx(e.idx)} {render(e.e)})"
    if isinstance(e, Zero):
        return "(" + " ".join(["zero", *map(render_idx, e.sig)]) + ")"
    if isinstance(e, Const):
        return f'(const "{S.render(e.value)}")'
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# elaboration


def _at(pos, exc_type, msg):
    return exc_type(f"{pos[0]}:{pos[1]}: {msg}")


def builtin_tensor(cs: G.CoordSystem, name: str):
    """(slot objects, component function over coordinate positions)."""
    T, Ts = cs.atom, dual(cs.atom)
    if name == "metric":
        return [T, T], lambda i, j: cs.metric[i][j]
    if name == "cometric":
        gp = G.cometric(cs)
        return [Ts, Ts], lambda i, j: gp[i][j]
    if name == "christoffel":
        gam = G.christoffel(cs)
        return [T, T, Ts], lambda i, j, k: gam[i][j][k]
    if name == "curvature":
        riem = G.curvature(cs)
        return [Ts, T, T, T], lambda l, i, j, k: riem[l][i][j][k]
    if name == "ricci":
        ric = G.ricci(cs)
        return [T, T], lambda i, j: ric[i][j]
    raise KeyError(name)


def parse_prim(text: str):
    """``NAME=e1,e2,...``: components in row-major order over coordinate positions."""
    name, sep, body = text.partition("=")
    name = name.strip()
    if not sep or not name or not name[0].isalpha():
        raise ParseError(f"--prim expects NAME=EXPR[,EXPR...], got {text!r}")
    if name in BUILTINS:
        raise ParseError(f"--prim cannot redefine the builtin {name!r}")
    return name, [S.parse_scalar(part) for part in body.split(",")]


class Elaborator:
    """Lower an AST to an albert network over a coordinate system."""

    def __init__(self, cs: G.CoordSystem, prims=None):
        self.cs = cs
        self.prims = dict(prims or {})

    def obj(self, up):
        return dual(self.cs.atom) if up else self.cs.atom

    def run(self, e):
        """(net, {(name, up): port}) for an expression."""
        net, free = self._el(e)
        A.check_linear(net)
        return net, {k: p for k, (p, _) in free.items()}

    def _slot(self, i):
        """(slot port, free-entry key, (port, pos), fragment or None)."""
        if isinstance(i, Idx):
            p = A.fresh_port(self.obj(i.up), i.name)
            return p, (i.name, i.up), (p, i.pos), None
        inner = i.idx
        if not isinstance(inner, Idx):
            raise _at(i.pos, TypeMismatch, "nested raise/lower")
        if i.kind == "lower" and not inner.up:
            raise _at(i.pos, TypeMismatch, "lower expects an upper index ^x")
        if i.kind == "raise" and inner.up:
            raise _at(i.pos, TypeMismatch, "raise expects a lower index _x")
        p = A.fresh_port(self.obj(inner.up), inner.name)
        frag, q = (A.lower if i.kind == "lower" else A.raise_)(p, self.cs)
        return q, (inner.name, inner.up), (p, i.pos), frag

    @staticmethod
    def _merge(free, key, entry):
        if key in free:
            pos = entry[1]
            mark = "^" if key[1] else "_"
            raise ReboundIndex(f"index {mark}{key[0]} occurs twice with the same polarity", *pos)
        free[key] = entry

    def _el(self, e):
        if isinstance(e, (Tensor, Delta, Zero)):
            idxs = {Tensor: lambda: e.idxs, Delta: lambda: (e.a, e.b), Zero: lambda: e.sig}[type(e)]()
            slots, free, frags = [], {}, []
            for i in idxs:
                q, key, entry, frag = self._slot(i)
                self._merge(free, key, entry)
                slots.append(q)
                if frag is not None:
                    frags.append(frag)
            core = self._core(e, slots)
            return A.multiply(core, *frags), free
        if isinstance(e, Const):
            return A.constant(e.value), {}
        if isinstance(e, Scale):
            net, free = self._el(e.e)
            return A.scaled(S.const_q(e.q), net), free
        if isinstance(e, Mul):
            na, fa = self._el(e.a)
            nb, fb = self._el(e.b)
            free = dict(fa)
            for k, v in fb.items():
                self._merge(free, k, v)
            return A.multiply(na, nb), free
        if isinstance(e, Plus):
            first, f0 = self._el(e.terms[0])
            nets = [first]
            for t in e.terms[1:]:
                n, f = self._el(t)
                if set(f) != set(f0):
                    show = lambda ks: ", ".join(sorted(("^" if u else "_") + x for x, u in ks)) or "none"  # noqa: E731
                    raise _at(t.pos, SignatureMismatch,
                              f"plus branch has free indices {show(f)}, expected {show(f0)}")
                nets.append(A.clone(n, mapping={f[k][0]: f0[k][0] for k in f}))
            return A.plus(nets), f0
        if isinstance(e, Contract):
            net, free = self._el(e.e)
            hi, lo = (e.name, True), (e.name, False)
            missing = [("^" if k[1] else "_") + e.name for k in (hi, lo) if k not in free]
            if missing:
                raise UnboundIndex(f"contract {e.name}: body has no free {' or '.join(missing)}", *e.pos)
            net = A.contract(net, free.pop(hi)[0], free.pop(lo)[0])
            return net, free
        if isinstance(e, Deriv):
            net, free = self._el(e.e)
            q, key, entry, frag = self._slot(e.idx)
            if not isinstance(q.obj, Atom):
                raise _at(e.pos, TypeMismatch, f"{e.kind} direction must be covariant (_x or (lower ^x))")
            self._merge(free, key, entry)
            box = (A.deriv_box if e.kind == "deriv" else A.partial_box)(q, net)
            return (A.multiply(box, frag) if frag is not None else box), free
        raise TypeError(f"not an expression: {e!r}")

    def _core(self, e, slots):
        if isinstance(e, Delta):
            a, b = slots
            if isinstance(a.obj, Atom) and b.obj == dual(a.obj):
                return A.delta(a, b)
            if isinstance(b.obj, Atom) and a.obj == dual(b.obj):
                return A.delta(b, a)
            raise _at(e.pos, TypeMismatch, "delta needs one upper and one lower index")
        if isinstance(e, Zero):
            return A.zero_tensor(slots)
        objs, comp = self._tensor(e)
        if len(objs) != len(slots):
            raise _at(e.pos, TypeMismatch, f"tensor {e.name} takes {len(objs)} indices, got {len(slots)}")
        for k, (o, p) in enumerate(zip(objs, slots)):
            if p.obj != o:
                want = "upper" if o != self.cs.atom else "lower"
                raise _at(e.idxs[k].pos, TypeMismatch, f"slot {k + 1} of {e.name} is {want}")
        coords = self.cs.coords
        entries = {}
        for combo in _positions(len(objs), len(coords)):
            v = comp(*combo)
            ix = [coords[c] if o == self.cs.atom else DualIx(coords[c]) for c, o in zip(combo, objs)]
            entries[lnest_ix(ix), ()] = v
        form = R.MatMorphism(lnest(objs), lnest([]), entries)
        glyph = "metric" if e.name in ("metric", "cometric") else "box"
        return A.embed(form, slots, e.name, {"glyph": glyph})

    def _tensor(self, e):
        if e.name in BUILTINS:
            return builtin_tensor(self.cs, e.name)
        if e.name not in self.prims:
            raise _at(e.pos, UnboundSymbol, f"unknown tensor {e.name!r}")
        comps = self.prims[e.name]
        d, r = self.cs.dim, len(e.idxs)
        if len(comps) != d ** r:
            raise _at(e.pos, TypeMismatch,
                      f"tensor {e.name} has {len(comps)} components; {r} indices need {d ** r}")
        objs = [self.obj(_slot_up(i)) for i in e.idxs]

        def comp(*combo):
            k = 0
            for c in combo:
                k = k * d + c
            return comps[k]

        return objs, comp


def _slot_up(i):
    if isinstance(i, Juggle):
        return not i.idx.up
    return i.up


def _positions(r, d):
    if r == 0:
        return [()]
    return [(c, *rest) for c in range(d) for rest in _positions(r - 1, d)]


def resolve_order(free: dict, names, pos=(1, 1)):
    """Ports for ``--order`` names; every free index must be listed once."""
    by_name = {}
    for (name, up), p in free.items():
        by_name.setdefault(name, []).append(p)
    out = []
    for name in names:
        ports = by_name.get(name)
        if not ports:
            raise UnboundIndex(f"--order names {name!r}, which is not a free index", *pos)
        if len(ports) > 1:
            raise UnboundIndex(f"index {name!r} is free as both ^{name} and _{name}; contract it", *pos)
        out.append(ports[0])
    missing = sorted(set(by_name) - set(names))
    if missing:
        raise UnboundIndex(f"free indices missing from --order: {', '.join(missing)}", *pos)
    return out


def evaluate(cs: G.CoordSystem, net: A.Net, order):
    if A.has_boxes(net, "covariant"):
        net = G.expand_derivatives(cs, net)
    return A.eval_einsum(net, order).simplified()


# ---------------------------------------------------------------------------
# subcommands


def _system(args) -> G.CoordSystem:
    if args.system == "schwarzschild":
        return G.schwarzschild(args.rs, args.c)
    return G.SYSTEMS[args.system]()


def _fmt_num(x: float) -> str:
    return "0" if x == 0 else f"{x:.12g}"


def cmd_christoffel(args, out):
    cs = _system(args)
    gam, x = G.christoffel(cs), cs.coords
    out(f"# Gamma^k_ij for {cs.name}; zero components omitted")
    for k in range(cs.dim):
        for i in range(cs.dim):
            for j in range(cs.dim):
                v = gam[i][j][k]
                if v != S.ZERO:
                    out(f"Gamma^{x[k]}_{x[i]},{x[j]} = {v}")
    return EXIT_OK


def cmd_curvature(args, out):
    cs = _system(args)
    riem, x = G.curvature(cs), cs.coords
    d = cs.dim
    out(f"# R^l_ijk for {cs.name}; zero components omitted")
    for l in range(d):
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    v = riem[l][i][j][k]
                    if v != S.ZERO:
                        out(f"R^{x[l]}_{x[i]},{x[j]},{x[k]} = {v}")
    ric = G.ricci(cs)
    for i in range(d):
        for j in range(d):
            if ric[i][j] != S.ZERO:
                out(f"Ricci_{x[i]},{x[j]} = {ric[i][j]}")
    return EXIT_OK


def cmd_verify_gr(args, out):
    cs = _system(args)
    lhs = G.gr_lhs(cs)
    x = cs.coords
    bad = 0
    for i in range(cs.dim):
        for j in range(cs.dim):
            ok = S.is_zero(lhs[i][j], cs.domain, trials=args.samples, tol=args.tol, seed=args.seed)
            bad += not ok
            out(f"gr_lhs[{x[i]},{x[j]}] {'zero' if ok else 'NONZERO'}")
    out(f"{cs.dim * cs.dim - bad}/{cs.dim * cs.dim} entries vanish "
        f"({args.samples} samples, tol {args.tol:g}, seed {args.seed})")
    return EXIT_OK if bad == 0 else EXIT_VERIFY


def _vector(m: R.MatMorphism, cs, n):
    """Dense nested list for a form over ``n`` covariant slots."""
    x = cs.coords
    if n == 1:
        return [m[x[i], ()] for i in range(cs.dim)]
    return [[m[(x[i], x[j]), ()] for j in range(cs.dim)] for i in range(cs.dim)]


def _show(v):
    if isinstance(v, list):
        return "[" + ", ".join(_show(x) for x in v) + "]"
    return str(v)


def cmd_polar_demo(args, out):
    cs = G.polar()
    T = cs.atom
    P = S.neg(S.log_e(S.var("rho")))
    out(f"P = {P}")
    i, j = A.fresh_port(T, "i"), A.fresh_port(T, "j")
    grad = A.deriv_box(i, A.constant(P))
    out(f"grad P = {_show(_vector(evaluate(cs, grad, [i]), cs, 1))}")
    hess = A.deriv_box(j, A.deriv_box(i, A.constant(P)))
    out(f"hess P = {_show(_vector(evaluate(cs, hess, [j, i]), cs, 2))}")
    k, l = A.fresh_port(dual(T), "i"), A.fresh_port(T, "i")
    frag, q = A.lower(k, cs)
    div = A.contract(A.multiply(A.deriv_box(l, A.deriv_box(q, A.constant(P))), frag), k, l)
    value = evaluate(cs, div, [])[(), ()]
    out(f"divergence = {value}")
    return EXIT_OK


def cmd_transform_demo(args, out):
    jac = G.jacobian_polar_to_cartesian()
    rho = S.var("rho")
    v = [S.neg(S.recip(rho)), S.ZERO]
    out(f"J = {_show(jac.matrix)}")
    out(f"J^-1 = {_show(jac.inverse)}")
    out(f"v (polar) = {_show(v)}")
    out(f"v (cartesian) = {_show(G.transform_covector(jac, v))}")
    return EXIT_OK


def _load_expr(args):
    with open(args.expr, encoding="utf-8") as fh:
        src = fh.read()
    return parse(src)


def cmd_eval(args, out):
    ast = _load_expr(args)
    cs = _system(args)
    prims = dict(parse_prim(p) for p in args.prim)
    net, free = Elaborator(cs, prims).run(ast)
    names = [n for n in (args.order or "").split(",") if n]
    order = resolve_order(free, names)
    m = evaluate(cs, net, order)
    env = None
    if args.at:
        env = dict(cs.domain.fixed)
        env.update(S.parse_env(args.at))
    ixs = enumerate_indices(lnest([p.obj for p in order]))
    for ix in ixs:
        v = m[ix, ()]
        text = _fmt_num(S.eval_num(v, env)) if env is not None else str(v)
        if order:
            parts = [str(c) for c in split_lnest_ix(ix, len(order))]
            out(f"{','.join(parts)}: {text}")
        else:
            out(text)
    return EXIT_OK


def cmd_diagram(args, out):
    from tensorcat import diagram as D

    ast = _load_expr(args)
    cs = _system(args)
    prims = dict(parse_prim(p) for p in args.prim)
    net, free = Elaborator(cs, prims).run(ast)
    names = [n for n in (args.order or "").split(",") if n]
    order = resolve_order(free, names) if names else sorted(free.values(), key=lambda p: p.id)
    term = A.to_morphism(net, order, connection=cs.connection)
    style = D.StyleConfig.load(args.style) if args.style else None
    svg = D.render(term, style)
    with open(args.output, "wb") as fh:
        fh.write(svg)
    out(f"wrote {args.output} ({len(svg)} bytes, {R.term_size(term)} term nodes)")
    return EXIT_OK


def cmd_laws(args, out):
    from tensorcat import laws as L

    dims = [int(d) for d in args.dims.split(",") if d]
    results, total = L.run_laws(dims, seed=args.seed, morphisms=args.morphisms, tol=args.tol)
    passed = 0
    for r in results:
        passed += r.passed
        out(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.detail})")
    out(f"{passed}/{len(results)} laws hold; {total} random morphisms; seed {args.seed}")
    return EXIT_OK if passed == len(results) else EXIT_VERIFY


# ---------------------------------------------------------------------------
# entry point


def _default_seed():
    raw = os.environ.get("TENSORCAT_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tensorcat", description="Symbolic tensor calculus toolkit.")
    sub = p.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    def system(sp, default="polar"):
        sp.add_argument("--system", choices=sorted(G.SYSTEMS), default=default)
        sp.add_argument("--rs", type=float, default=1.0, help="Schwarzschild radius")
        sp.add_argument("--c", type=float, default=1.0, help="speed of light")

    sp = sub.add_parser("christoffel", help="print Christoffel symbols")
    system(sp)
    sp.set_defaults(fn=cmd_christoffel)

    sp = sub.add_parser("curvature", help="print nonzero Riemann and Ricci components")
    system(sp)
    sp.set_defaults(fn=cmd_curvature)

    sp = sub.add_parser("verify-gr", help="check the vacuum field equation numerically")
    system(sp, "schwarzschild")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--seed", type=int, default=seed)
    sp.set_defaults(fn=cmd_verify_gr)

    sp = sub.add_parser("polar-demo", help="gradient, Hessian and divergence of -log(rho)")
    sp.set_defaults(fn=cmd_polar_demo)

    sp = sub.add_parser("transform-demo", help="covector transform polar to cartesian")
    sp.set_defaults(fn=cmd_transform_demo)

    for name, fn, help_ in (("eval", cmd_eval, "evaluate an expression file"),
                            ("diagram", cmd_diagram, "render an expression file as SVG")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--expr", required=True, help="expression file (UTF-8)")
        system(sp)
        sp.add_argument("--order", default="", help="comma-separated free index names")
        sp.add_argument("--prim", action="append", default=[], metavar="NAME=EXPR[,EXPR...]",
                        help="register a tensor by its components")
        if name == "eval":
            sp.add_argument("--at", default=None, help="numeric point, e.g. rho=2,theta=0.3")
        else:
            sp.add_argument("-o", "--output", required=True)
            sp.add_argument("--style", default=None, help="key=value style file")
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("laws", help="run the categorical law suite")
    sp.add_argument("--dims", default="2,3")
    sp.add_argument("--seed", type=int, default=seed)
    sp.add_argument("--morphisms", type=int, default=500)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(fn=cmd_laws)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args, print)
    except (SamplingExhausted, EvalSingular) as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TensorCatError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"E_IO: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
