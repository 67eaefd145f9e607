"""Point-free categorical tensor language and its matrix semantics.

Morphisms ``a ⤳ b`` of the matrix category are tabulated as sparse maps
from ``(domain index, codomain index)`` to scalar expressions
(:class:`MatMorphism`); missing entries are zero.  Terms of the free
language (:class:`Term` and subclasses) are typed at construction and
mapped to matrices by :func:`eval_term`.

Composition follows the usual convention: ``compose(g, f)`` is ``g ∘ f``
and its entry ``(i, j)`` is ``Σ_k f(i,k)·g(k,j)``.
"""

from __future__ import annotations

from tensorcat import scalar as S
from tensorcat.errors import TypeMismatch
from tensorcat.objects import (
    UNIT, Obj, Prod, dual, enumerate_indices, is_index_of, ix_dual, show_ix,
)


class MatMorphism:
    """Sparse table of scalar entries for a morphism ``dom ⤳ cod``."""

    __slots__ = ("dom", "cod", "entries")

    def __init__(self, dom: Obj, cod: Obj, entries=None, check=False):
        self.dom = dom
        self.cod = cod
        clean = {}
        for key, v in (entries or {}).items():
            v = S.as_expr(v)
            if not (isinstance(v, S.Const) and v.value == 0):
                clean[key] = v
        if check:
            for i, j in clean:
                if not (is_index_of(i, dom) and is_index_of(j, cod)):
                    raise TypeMismatch(f"entry key ({show_ix(i)}, {show_ix(j)}) "
                                       f"is not an index pair of {dom} ⤳ {cod}")
        self.entries = clean

    @classmethod
    def from_function(cls, dom, cod, fn):
        return cls(dom, cod, {(i, j): fn(i, j) for i in enumerate_indices(dom)
                              for j in enumerate_indices(cod)})

    def __getitem__(self, key):
        return self.entries.get(key, S.ZERO)

    def map(self, fn) -> "MatMorphism":
        return MatMorphism(self.dom, self.cod, {k: fn(v) for k, v in self.entries.items()})

    def simplified(self) -> "MatMorphism":
        return self.map(S.simplify)

    def rows(self):
        """Dense table in index order: list of rows (domain) of columns (codomain)."""
        cols = enumerate_indices(self.cod)
        return [[self[i, j] for j in cols] for i in enumerate_indices(self.dom)]

    def __repr__(self):
        return f"MatMorphism({self.dom} ⤳ {self.cod}, {len(self.entries)} nonzero)"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(S.MINUS_ONE, other))

    def __matmul__(self, other):
        return compose(self, other)


def _check_same_type(f, g, what):
    if f.dom != g.dom or f.cod != g.cod:
        raise TypeMismatch(f"{what}: {f.dom} ⤳ {f.cod} vs {g.dom} ⤳ {g.cod}")


def _sum_terms(terms, simplify):
    e = S.add(*terms)
    if simplify and len(terms) > 1:
        e = S.simplify(e)
    return e


# ---------------------------------------------------------------------------
# matrix operations


def identity(o: Obj) -> MatMorphism:
    return MatMorphism(o, o, {(i, i): S.ONE for i in enumerate_indices(o)})


def compose(g: MatMorphism, f: MatMorphism, simplify=True) -> MatMorphism:
    """``g ∘ f``."""
    if f.cod != g.dom:
        raise TypeMismatch(f"cannot compose: codomain {f.cod} ≠ domain {g.dom}")
    by_row = {}
    for (k, j), w in g.entries.items():
        by_row.setdefault(k, []).append((j, w))
    acc = {}
    for (i, k), v in f.entries.items():
        for j, w in by_row.get(k, ()):
            acc.setdefault((i, j), []).append(S.mul(v, w))
    return MatMorphism(f.dom, g.cod, {key: _sum_terms(ts, simplify) for key, ts in acc.items()})


def tensor(f: MatMorphism, g: MatMorphism) -> MatMorphism:
    """Kronecker product on pair indices."""
    out = {}
    for (i, j), v in f.entries.items():
        for (k, l), w in g.entries.items():
            out[(i, k), (j, l)] = S.mul(v, w)
    return MatMorphism(Prod(f.dom, g.dom), Prod(f.cod, g.cod), out)


def sigma(a: Obj, b: Obj) -> MatMorphism:
    return MatMorphism(Prod(a, b), Prod(b, a), {
        ((x, y), (y, x)): S.ONE for x in enumerate_indices(a) for y in enumerate_indices(b)})


def alpha(a: Obj, b: Obj, c: Obj) -> MatMorphism:
    """``(a⊗b)⊗c ⤳ a⊗(b⊗c)``."""
    return MatMorphism(Prod(Prod(a, b), c), Prod(a, Prod(b, c)), {
        (((x, y), z), (x, (y, z))): S.ONE
        for x in enumerate_indices(a) for y in enumerate_indices(b) for z in enumerate_indices(c)})


def alpha_inv(a: Obj, b: Obj, c: Obj) -> MatMorphism:
    """``a⊗(b⊗c) ⤳ (a⊗b)⊗c``."""
    return MatMorphism(Prod(a, Prod(b, c)), Prod(Prod(a, b), c), {
        ((x, (y, z)), ((x, y), z)): S.ONE
        for x in enumerate_indices(a) for y in enumerate_indices(b) for z in enumerate_indices(c)})


def rho_intro(a: Obj) -> MatMorphism:
    """``a ⤳ a⊗1``."""
    return MatMorphism(a, Prod(a, UNIT), {(x, (x, ())): S.ONE for x in enumerate_indices(a)})


def rho_elim(a: Obj) -> MatMorphism:
    """``a⊗1 ⤳ a``."""
    return MatMorphism(Prod(a, UNIT), a, {((x, ()), x): S.ONE for x in enumerate_indices(a)})


def eta(a: Obj) -> MatMorphism:
    """Unit ``1 ⤳ a*⊗a``."""
    return MatMorphism(UNIT, Prod(dual(a), a), {
        ((), (ix_dual(x), x)): S.ONE for x in enumerate_indices(a)})


def eps(a: Obj) -> MatMorphism:
    """Counit ``a⊗a* ⤳ 1``."""
    return MatMorphism(Prod(a, dual(a)), UNIT, {
        ((x, ix_dual(x)), ()): S.ONE for x in enumerate_indices(a)})


def add(f: MatMorphism, g: MatMorphism, simplify=True) -> MatMorphism:
    _check_same_type(f, g, "cannot add")
    out = dict(f.entries)
    for key, v in g.entries.items():
        out[key] = _sum_terms([out[key], v], simplify) if key in out else v
    return MatMorphism(f.dom, f.cod, out)


def add_many(fs, dom=None, cod=None, simplify=True) -> MatMorphism:
    fs = list(fs)
    if not fs:
        return zero_m(dom, cod)
    for f in fs[1:]:
        _check_same_type(fs[0], f, "cannot add")
    acc = {}
    for f in fs:
        for key, v in f.entries.items():
            acc.setdefault(key, []).append(v)
    return MatMorphism(fs[0].dom, fs[0].cod, {k: _sum_terms(ts, simplify) for k, ts in acc.items()})


def scale(s, f: MatMorphism) -> MatMorphism:
    s = S.as_expr(s)
    return MatMorphism(f.dom, f.cod, {k: S.mul(s, v) for k, v in f.entries.items()})


def zero_m(a: Obj, b: Obj) -> MatMorphism:
    return MatMorphism(a, b, {})


def antisym(a: Obj) -> MatMorphism:
    """``id − σ`` on ``a⊗a``."""
    return add(identity(Prod(a, a)), scale(S.MINUS_ONE, sigma(a, a)))


def transpose_dual(f: MatMorphism) -> MatMorphism:
    """The same coefficients read as ``cod* ⤳ dom*``."""
    return MatMorphism(dual(f.cod), dual(f.dom),
                       {(ix_dual(j), ix_dual(i)): v for (i, j), v in f.entries.items()})


def equal_num(f: MatMorphism, g: MatMorphism, domain=None, trials=20, tol=1e-9, seed=0) -> bool:
    """Numeric equality of every entry of two morphisms of the same type."""
    _check_same_type(f, g, "cannot compare")
    keys = set(f.entries) | set(g.entries)
    diffs = [S.sub(f[k], g[k]) for k in keys]
    return S.is_zero_all(diffs, domain or S.Domain(), trials, tol, seed)


def dump(f: MatMorphism) -> str:
    """Labeled table: one row per domain index, one column per codomain index."""
    cols = enumerate_indices(f.cod)
    head = ["", *(show_ix(j) for j in cols)]
    body = [[show_ix(i), *(str(f[i, j]) for j in cols)] for i in enumerate_indices(f.dom)]
    widths = [max(len(r[c]) for r in [head, *body]) for c in range(len(head))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in [head, *body]]
    return f"{f.dom} ⤳ {f.cod}\n" + "\n".join(lines)


# ---------------------------------------------------------------------------
# free terms


class Term:
    """Base class of typed terms; ``dom`` and ``cod`` are set by subclasses."""

    __slots__ = ("dom", "cod")

    def __matmul__(self, other):
        return Comp(self, other)

    def __add__(self, other):
        return Sum([self, other])

    def __repr__(self):
        return show_term(self)


class Id(Term):
    __slots__ = ("obj",)

    def __init__(self, obj: Obj):
        self.obj = obj
        self.dom = self.cod = obj


class Comp(Term):
    """``g ∘ f``: run ``f`` then ``g``."""

    __slots__ = ("g", "f")

    def __init__(self, g: Term, f: Term):
        if f.cod != g.dom:
            raise TypeMismatch(f"cannot compose {show_term(g)} after {show_term(f)}: "
                               f"{f.cod} ≠ {g.dom}")
        self.g, self.f = g, f
        self.dom, self.cod = f.dom, g.cod


class Ten(Term):
    __slots__ = ("left", "right")

    def __init__(self, left: Term, right: Term):
        self.left, self.right = left, right
        self.dom = Prod(left.dom, right.dom)
        self.cod = Prod(left.cod, right.cod)


class Sigma(Term):
    __slots__ = ("a", "b")

    def __init__(self, a: Obj, b: Obj):
        self.a, self.b = a, b
        self.dom, self.cod = Prod(a, b), Prod(b, a)


class Alpha(Term):
    __slots__ = ("a", "b", "c")

    def __init__(self, a: Obj, b: Obj, c: Obj):
        self.a, self.b, self.c = a, b, c
        self.dom, self.cod = Prod(Prod(a, b), c), Prod(a, Prod(b, c))


class AlphaInv(Term):
    __slots__ = ("a", "b", "c")

    def __init__(self, a: Obj, b: Obj, c: Obj):
        self.a, self.b, self.c = a, b, c
        self.dom, self.cod = Prod(a, Prod(b, c)), Prod(Prod(a, b), c)


class RhoIntro(Term):
    __slots__ = ("a",)

    def __init__(self, a: Obj):
        self.a = a
        self.dom, self.cod = a, Prod(a, UNIT)


class RhoElim(Term):
    __slots__ = ("a",)

    def __init__(self, a: Obj):
        self.a = a
        self.dom, self.cod = Prod(a, UNIT), a


class Eta(Term):
    __slots__ = ("a",)

    def __init__(self, a: Obj):
        self.a = a
        self.dom, self.cod = UNIT, Prod(dual(a), a)


class Eps(Term):
    __slots__ = ("a",)

    def __init__(self, a: Obj):
        self.a = a
        self.dom, self.cod = Prod(a, dual(a)), UNIT


class Prim(Term):
    """Named generator.  ``mat`` may be ``None`` for purely structural uses
    (diagram rendering); ``meta`` carries rendering hints."""

    __slots__ = ("name", "mat", "meta")

    def __init__(self, name: str, mat: MatMorphism | None = None, dom=None, cod=None, meta=None):
        self.name = name
        self.mat = mat
        self.meta = dict(meta or {})
        if mat is not None:
            if (dom is not None and dom != mat.dom) or (cod is not None and cod != mat.cod):
                raise TypeMismatch(f"primitive {name}: declared type disagrees with its matrix")
            dom, cod = mat.dom, mat.cod
        if dom is None or cod is None:
            raise TypeMismatch(f"primitive {name} needs a type")
        self.dom, self.cod = dom, cod


class Sum(Term):
    __slots__ = ("terms",)

    def __init__(self, terms):
        terms = list(terms)
        if not terms:
            raise TypeMismatch("empty sum needs an explicit ZeroM")
        for t in terms[1:]:
            if t.dom != terms[0].dom or t.cod != terms[0].cod:
                raise TypeMismatch(f"sum branches disagree: {terms[0].dom} ⤳ {terms[0].cod} "
                                   f"vs {t.dom} ⤳ {t.cod}")
        self.terms = terms
        self.dom, self.cod = terms[0].dom, terms[0].cod


class Scale(Term):
    __slots__ = ("s", "t")

    def __init__(self, s, t: Term):
        self.s = S.as_expr(s)
        self.t = t
        self.dom, self.cod = t.dom, t.cod


class ZeroM(Term):
    __slots__ = ()

    def __init__(self, a: Obj, b: Obj):
        self.dom, self.cod = a, b


def comp(*terms) -> Term:
    """``t1 ∘ t2 ∘ … ∘ tn`` (the last term runs first)."""
    if not terms:
        raise ValueError("comp needs at least one term")
    acc = terms[-1]
    for t in reversed(terms[:-1]):
        acc = Comp(t, acc)
    return acc


def antisym_term(a: Obj) -> Term:
    return Prim("antisym", antisym(a), meta={"glyph": "antisym"})


def show_term(t: Term) -> str:
    if isinstance(t, Id):
        return f"id[{t.obj}]"
    if isinstance(t, Comp):
        return f"({show_term(t.g)} ∘ {show_term(t.f)})"
    if isinstance(t, Ten):
        return f"({show_term(t.left)} ⊗ {show_term(t.right)})"
    if isinstance(t, Sum):
        return "(" + " + ".join(show_term(x) for x in t.terms) + ")"
    if isinstance(t, Scale):
        return f"({t.s} ▷ {show_term(t.t)})"
    if isinstance(t, Prim):
        return t.name
    if isinstance(t, ZeroM):
        return "0"
    names = {Sigma: "σ", Alpha: "α", AlphaInv: "ᾱ", RhoIntro: "ρ", RhoElim: "ρ̄", Eta: "η", Eps: "ε"}
    return names[type(t)]


def term_children(t: Term):
    if isinstance(t, Comp):
        return (t.f, t.g)
    if isinstance(t, Ten):
        return (t.left, t.right)
    if isinstance(t, Sum):
        return tuple(t.terms)
    if isinstance(t, Scale):
        return (t.t,)
    return ()


def term_size(t: Term) -> int:
    return 1 + sum(term_size(c) for c in term_children(t))


def eval_term(t: Term, simplify=True) -> MatMorphism:
    """Interpret a term in the matrix category.

    Rows are computed on demand: structural maps act as index functions and
    only generator tables are materialized, so large intermediate objects
    (as produced by network extraction) never become dense matrices.
    """
    row = _row_fn(t)
    entries = {}
    for i in enumerate_indices(t.dom):
        for j, v in row(i):
            entries[i, j] = S.simplify(v) if simplify else v
    return MatMorphism(t.dom, t.cod, entries)


def _times(w, v):
    if w is S.ONE:
        return v
    if v is S.ONE:
        return w
    return S.mul(w, v)


def _collect(acc):
    return tuple((k, vs[0] if len(vs) == 1 else S.add(*vs)) for k, vs in acc.items())


def _comp_chain(t):
    """Flatten nested compositions; first-run term first."""
    out, stack = [], [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Comp):
            stack.append(x.g)
            stack.append(x.f)
        else:
            out.append(x)
    return out


_STRUCTURAL = ()  # filled below, once the classes exist


def _is_structural(t: Term) -> bool:
    if isinstance(t, (Comp, Ten)):
        return all(_is_structural(c) for c in term_children(t))
    return isinstance(t, _STRUCTURAL)


class _Marker:
    __slots__ = ("k",)

    def __init__(self, k):
        self.k = k


def _obj_leaves(o):
    return _obj_leaves(o.left) + _obj_leaves(o.right) if isinstance(o, Prod) else [o]


def _flatten_ix(ix, o, out):
    if isinstance(o, Prod):
        _flatten_ix(ix[0], o.left, out)
        _flatten_ix(ix[1], o.right, out)
    else:
        out.append(ix)
    return out


def _build_ix(o, it):
    if isinstance(o, Prod):
        left = _build_ix(o.left, it)
        return (left, _build_ix(o.right, it))
    return next(it)


def _compile_run(run):
    """One index function for a run of structural terms (first-run first)."""
    dom, cod = run[0].dom, run[-1].cod
    n = len(_obj_leaves(dom))
    probe = _build_ix(dom, iter([_Marker(k) for k in range(n)]))
    for t in run:
        (probe, _), = _row_fn(t)(probe)
    perm = [x.k if isinstance(x, _Marker) else None for x in _flatten_ix(probe, cod, [])]
    if perm == list(range(n)) and dom == cod:
        return lambda j: ((j, S.ONE),)

    def row(j):
        leaves = _flatten_ix(j, dom, [])
        return ((_build_ix(cod, iter([() if p is None else leaves[p] for p in perm])), S.ONE),)
    return row


def _row_fn(t: Term):
    """``j ↦ ((k, value), …)``: the nonzero entries of row ``j``."""
    one = S.ONE
    if isinstance(t, Id):
        return lambda j: ((j, one),)
    if isinstance(t, Sigma):
        return lambda j: (((j[1], j[0]), one),)
    if isinstance(t, Alpha):
        return lambda j: (((j[0][0], (j[0][1], j[1])), one),)
    if isinstance(t, AlphaInv):
        return lambda j: ((((j[0], j[1][0]), j[1][1]), one),)
    if isinstance(t, RhoIntro):
        return lambda j: (((j, ()), one),)
    if isinstance(t, RhoElim):
        return lambda j: ((j[0], one),)
    if isinstance(t, Eta):
        rows = tuple(((ix_dual(x), x), one) for x in enumerate_indices(t.a))
        return lambda j: rows
    if isinstance(t, Eps):
        hit = (((), one),)
        return lambda j: hit if j[1] == ix_dual(j[0]) else ()
    if isinstance(t, (Prim, ZeroM)):
        if isinstance(t, Prim) and t.mat is None:
            raise TypeMismatch(f"primitive {t.name} has no matrix to evaluate")
        by_row = {}
        if isinstance(t, Prim):
            for (i, j), v in t.mat.entries.items():
                by_row.setdefault(i, []).append((j, v))
        return lambda j: by_row.get(j, ())
    if isinstance(t, Scale):
        inner, s = _row_fn(t.t), t.s
        return lambda j: tuple((k, S.mul(s, v)) for k, v in inner(j))
    if isinstance(t, Sum):
        fns = [_row_fn(x) for x in t.terms]

        def sum_row(j):
            acc = {}
            for fn in fns:
                for k, v in fn(j):
                    acc.setdefault(k, []).append(v)
            return _collect(acc)
        return sum_row
    if isinstance(t, Ten):
        fl, fr = _row_fn(t.left), _row_fn(t.right)
        if isinstance(t.left, Id):
            return lambda j: tuple(((j[0], k), u) for k, u in fr(j[1]))
        if isinstance(t.right, Id):
            return lambda j: tuple(((k, j[1]), w) for k, w in fl(j[0]))

        def ten_row(j):
            right = fr(j[1])
            return tuple(((k1, k2), _times(w, u)) for k1, w in fl(j[0]) for k2, u in right)
        return ten_row
    if isinstance(t, Comp):
        fns, run = [], []
        for x in _comp_chain(t):
            if _is_structural(x):
                run.append(x)
                continue
            if run:
                fns.append(_compile_run(run) if len(run) > 1 else _row_fn(run[0]))
                run = []
            fns.append(_row_fn(x))
        if run:
            fns.append(_compile_run(run) if len(run) > 1 else _row_fn(run[0]))

        def comp_row(j):
            cur = ((j, one),)
            for fn in fns:
                if len(cur) == 1:
                    (k, w), = cur
                    cur = tuple((l, _times(w, u)) for l, u in fn(k))
                    continue
                acc = {}
                for k, w in cur:
                    for l, u in fn(k):
                        acc.setdefault(l, []).append(_times(w, u))
                cur = _collect(acc)
            return cur
        return comp_row
    raise TypeError(f"not a term: {t!r}")


_STRUCTURAL = (Id, Sigma, Alpha, AlphaInv, RhoIntro, RhoElim)


def invert(t: Term) -> Term:
    """Inverse of a structural isomorphism (no Prim, Eta, Eps, Sum, Scale)."""
    if isinstance(t, Id):
        return t
    if isinstance(t, Comp):
        return Comp(invert(t.f), invert(t.g))
    if isinstance(t, Ten):
        return Ten(invert(t.left), invert(t.right))
    if isinstance(t, Sigma):
        return Sigma(t.b, t.a)
    if isinstance(t, Alpha):
        return AlphaInv(t.a, t.b, t.c)
    if isinstance(t, AlphaInv):
        return Alpha(t.a, t.b, t.c)
    if isinstance(t, RhoIntro):
        return RhoElim(t.a)
    if isinstance(t, RhoElim):
        return RhoIntro(t.a)
    raise TypeMismatch(f"{show_term(t)} is not a structural isomorphism")


# ---------------------------------------------------------------------------
# index juggling
#
# ``cs`` is anything exposing ``atom`` (the object T), ``metric_morphism()``
# (g : T⊗T ⤳ 1) and ``cometric_morphism()`` (g′ : 1 ⤳ T⊗T).


def juggle_down_term(cs) -> Term:
    """``ρ̄ ∘ σ ∘ ((ε∘σ) ⊗ id) ∘ ᾱ ∘ (id ⊗ g′) ∘ ρ : T* ⤳ T``."""
    t = cs.atom
    ts = dual(t)
    gp = Prim("g'", cs.cometric_morphism(), meta={"glyph": "metric"})
    return comp(
        RhoElim(t),
        Sigma(UNIT, t),
        Ten(Comp(Eps(t), Sigma(ts, t)), Id(t)),
        AlphaInv(ts, t, t),
        Ten(Id(ts), gp),
        RhoIntro(ts),
    )


def juggle_up_term(cs) -> Term:
    """``ρ̄ ∘ (id ⊗ g) ∘ α ∘ (σ ⊗ id) ∘ ᾱ ∘ (id ⊗ η) ∘ ρ : T ⤳ T*``."""
    t = cs.atom
    ts = dual(t)
    g = Prim("g", cs.metric_morphism(), meta={"glyph": "metric"})
    return comp(
        RhoElim(ts),
        Ten(Id(ts), g),
        Alpha(ts, t, t),
        Ten(Sigma(t, ts), Id(t)),
        AlphaInv(t, ts, t),
        Ten(Id(t), Eta(t)),
        RhoIntro(t),
    )


def juggle_down(cs) -> MatMorphism:
    return eval_term(juggle_down_term(cs))


def juggle_up(cs) -> MatMorphism:
    return eval_term(juggle_up_term(cs))
