"""Einstein-index tensor networks with use-exactly-once ports.

A :class:`Net` denotes a morphism ``(p1⊗…⊗pn) ⤳ 1`` once an order of its
free ports is chosen.  A port over ``T`` plays the part of a lower index
and a port over ``T*`` of an upper index.  Nets are built from
generators (embedded matrix morphisms), contraction edges, sums and
derivative boxes; every port is exposed by exactly one part and is either
free or an endpoint of exactly one edge.  :func:`check_linear` enforces
this at runtime.

Two evaluators are provided: :func:`to_morphism` extracts a point-free
:mod:`tensorcat.roger` term, while :func:`eval_einsum` contracts the
network directly and serves as an independent oracle for the former.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from tensorcat import roger as R
from tensorcat import scalar as S
from tensorcat.errors import (
    PortNotFree, PortReused, PortUnused, SignatureMismatch, TypeMismatch,
)
from tensorcat.objects import (
    UNIT, Atom, Obj, Prod, dual, enumerate_indices, ix_dual, lnest, lnest_ix,
    split_lnest_ix,
)

_counter = itertools.count(1)


@dataclass(frozen=True, eq=False)
class Port:
    """An index variable.  Identity is the ``id``; ``label`` is cosmetic."""

    id: int
    obj: Obj
    label: str = ""

    def __hash__(self):
        return self.id

    def __eq__(self, other):
        return isinstance(other, Port) and other.id == self.id

    def __repr__(self):
        return f"Port({self.label or '#'}{self.id}: {self.obj})"


def fresh_port(obj: Obj, label: str = "") -> Port:
    return Port(next(_counter), obj, label)


# ---------------------------------------------------------------------------
# parts


@dataclass(frozen=True, eq=False)
class Generator:
    name: str
    form: R.MatMorphism  # lnest(port objects) ⤳ 1
    ports: tuple
    meta: dict = field(default_factory=dict)

    def exposed(self):
        return list(self.ports)


@dataclass(frozen=True, eq=False)
class Box:
    """Derivative wrapper; ``kind`` is ``"covariant"`` or ``"partial"``."""

    kind: str
    direction: Port
    body: "Net"

    def exposed(self):
        return [self.direction, *self.body.free_ports()]


@dataclass(frozen=True, eq=False)
class SumPart:
    branches: tuple

    def exposed(self):
        return self.branches[0].free_ports()


@dataclass(frozen=True, eq=False)
class Net:
    parts: tuple = ()
    edges: tuple = ()  # (hi, lo) pairs; hi over a*, lo over a

    def exposed(self):
        return [p for part in self.parts for p in part.exposed()]

    def consumed(self):
        return {p for e in self.edges for p in e}

    def free_ports(self):
        used = self.consumed()
        return [p for p in self.exposed() if p not in used]

    def signature(self):
        return [(p.label or f"#{p.id}", p.obj) for p in self.free_ports()]

    @property
    def order(self):
        return len(self.free_ports())


def to_form(f: R.MatMorphism) -> R.MatMorphism:
    """Read ``f : a ⤳ b`` as ``a⊗b* ⤳ 1`` (``(i, j*)`` holds ``f(i, j)``)."""
    if f.cod == UNIT:
        return f
    return R.MatMorphism(Prod(f.dom, dual(f.cod)), UNIT,
                         {((i, ix_dual(j)), ()): v for (i, j), v in f.entries.items()})


def _leaves(o: Obj):
    if isinstance(o, Prod):
        return _leaves(o.left) + _leaves(o.right)
    return [o]


def _leaf_ixs(ix, o: Obj):
    if isinstance(o, Prod):
        return _leaf_ixs(ix[0], o.left) + _leaf_ixs(ix[1], o.right)
    return [ix]


def embed(prim: R.MatMorphism, ports, name: str = "t", meta=None) -> Net:
    """Embed ``prim : a ⤳ b`` as a generator over ports for ``a`` and ``b*``.

    The port objects must either left-nest to ``a⊗b*`` exactly, or list the
    atomic factors of ``a⊗b*`` in order.
    """
    ports = tuple(ports)
    form = to_form(prim)
    objs = [p.obj for p in ports]
    target = lnest(objs)
    if form.dom != target:
        if [o for o in _leaves(form.dom) if o != UNIT] != [o for o in objs if o != UNIT] \
                or any(isinstance(o, Prod) for o in objs):
            raise TypeMismatch(f"cannot embed {name} : {prim.dom} ⤳ {prim.cod} "
                               f"with ports over {', '.join(map(str, objs)) or 'nothing'}")
        entries = {}
        for (ix, _), v in form.entries.items():
            leaf = iter(x for x, o in zip(_leaf_ixs(ix, form.dom), _leaves(form.dom)) if o != UNIT)
            entries[lnest_ix([() if o == UNIT else next(leaf) for o in objs]), ()] = v
        form = R.MatMorphism(target, UNIT, entries)
    if len(set(ports)) != len(ports):
        raise PortReused(f"generator {name} uses a port twice")
    return Net((Generator(name, form, ports, dict(meta or {})),))


def constant(s) -> Net:
    """Scalar net with no ports."""
    return Net((Generator("const", R.MatMorphism(UNIT, UNIT, {((), ()): S.as_expr(s)}), (),
                          {"value": S.as_expr(s)}),))


def delta(i: Port, j: Port) -> Net:
    """Kronecker delta ``δ`` between ``i`` over ``a`` and ``j`` over ``a*`` (an ε node)."""
    if j.obj != dual(i.obj):
        raise TypeMismatch(f"delta needs dual ports, got {i.obj} and {j.obj}")
    return Net((Generator("δ", R.eps(i.obj), (i, j), {"glyph": "eps"}),))


def _all_ports(part) -> set:
    if isinstance(part, Generator):
        return set(part.ports)
    if isinstance(part, Box):
        return {part.direction} | _net_ports(part.body)
    return set().union(*(_net_ports(b) for b in part.branches))


def _net_ports(n: Net) -> set:
    out = set()
    for part in n.parts:
        out |= _all_ports(part)
    for e in n.edges:
        out |= set(e)
    return out


def multiply(*nets) -> Net:
    """Disjoint union (the ⋆ product); orders add."""
    # A port may meet itself across factors only when one factor holds it as
    # a dangling edge endpoint (a raise/lower fragment) and the other exposes it.
    seen = set()
    parts, edges = [], []
    for n in nets:
        ports = _net_ports(n)
        for p in seen & ports:
            if not _plugs(p, Net(tuple(parts), tuple(edges)), n):
                raise PortReused(f"port {p!r} appears in both factors")
        seen |= ports
        parts.extend(n.parts)
        edges.extend(n.edges)
    return Net(tuple(parts), tuple(edges))


def _dangling(n: Net):
    return n.consumed() - set(n.exposed())


def _plugs(p, a: Net, b: Net) -> bool:
    return (p in _dangling(a) and p in b.free_ports()) or (p in _dangling(b) and p in a.free_ports())


def contract(n: Net, hi: Port, lo: Port) -> Net:
    """Connect ``hi`` (over ``a*``) with ``lo`` (over ``a``); both must be free."""
    if hi.obj != dual(lo.obj) or hi == lo:
        raise TypeMismatch(f"cannot contract {hi!r} with {lo!r}: objects are not dual")
    free = set(n.free_ports())
    for p in (hi, lo):
        if p not in free:
            raise PortNotFree(f"{p!r} is not a free port of the network")
    return Net(n.parts, n.edges + ((hi, lo),))


def contract_with(obj: Obj, body, label: str = "") -> Net:
    """``contract (λ hi lo → body hi lo)`` with fresh ports; ``lo`` is over ``obj``."""
    hi, lo = fresh_port(dual(obj), label), fresh_port(obj, label)
    return contract(body(hi, lo), hi, lo)


def _sig_key(ports):
    return sorted((p.id, p.obj) for p in ports)


def plus(branches) -> Net:
    """Sum of nets sharing the same free ports."""
    branches = tuple(branches)
    if not branches:
        raise SignatureMismatch("plus needs at least one branch")
    key = _sig_key(branches[0].free_ports())
    for k, b in enumerate(branches[1:], 1):
        if _sig_key(b.free_ports()) != key:
            raise SignatureMismatch(f"branch {k} exposes different free ports than branch 0")
    return Net((SumPart(branches),))


def zero_tensor(ports) -> Net:
    ports = tuple(ports)
    return Net((Generator("0", R.zero_m(lnest(p.obj for p in ports), UNIT), ports,
                          {"glyph": "zero"}),))


def scaled(s, n: Net) -> Net:
    return multiply(constant(s), n)


def _juggle(p: Port, mat: R.MatMorphism, name: str):
    if p.obj != mat.dom:
        raise TypeMismatch(f"{name} expects a port over {mat.dom}, got {p.obj}")
    q = fresh_port(mat.cod, p.label)
    r = fresh_port(dual(mat.cod), p.label)
    frag = Net((Generator(name, to_form(mat), (p, r), {"glyph": "metric"}),), ((r, q),))
    return frag, q


def raise_(p: Port, cs):
    """Rebind lower port ``p`` as an upper one through ``juggleUp``.

    Returns ``(fragment, q)``: ``q`` must be consumed by exactly one other
    part, and the fragment multiplied into the same network.
    """
    return _juggle(p, R.juggle_up(cs), "raise")


def lower(p: Port, cs):
    """Counterpart of :func:`raise_` using ``juggleDown`` (upper port in, lower out)."""
    return _juggle(p, R.juggle_down(cs), "lower")


def _box(kind, direction: Port, n: Net) -> Net:
    if not isinstance(direction.obj, Atom):
        raise TypeMismatch(f"derivative direction must be over the atomic space, got {direction.obj}")
    if direction in _net_ports(n):
        raise PortReused(f"direction {direction!r} already occurs in the body")
    return Net((Box(kind, direction, n),))


def deriv_box(direction: Port, n: Net) -> Net:
    return _box("covariant", direction, n)


def partial_box(direction: Port, n: Net) -> Net:
    return _box("partial", direction, n)


# ---------------------------------------------------------------------------
# linearity


def check_linear(n: Net):
    """Raise if some port is used twice, dangles, or sum branches disagree.

    Returns the list of free ports on success.
    """
    _check(n)
    return n.free_ports()


def _check(n: Net):
    counts = {}
    owner_ports = []
    for k, part in enumerate(n.parts):
        if isinstance(part, Generator):
            if len(set(part.ports)) != len(part.ports):
                raise PortReused(f"generator {part.name} uses a port twice")
        elif isinstance(part, Box):
            _check(part.body)
            if part.direction in _net_ports(part.body):
                raise PortReused(f"direction {part.direction!r} reused inside its box")
        else:
            key = None
            internals = []
            for b, branch in enumerate(part.branches):
                _check(branch)
                free = branch.free_ports()
                if key is None:
                    key = _sig_key(free)
                elif _sig_key(free) != key:
                    raise SignatureMismatch(f"sum branch {b} exposes different free ports")
                internals.append(_net_ports(branch) - set(free))
            for a, b in itertools.combinations(range(len(internals)), 2):
                clash = internals[a] & internals[b]
                if clash:
                    raise PortReused(f"port {next(iter(clash))!r} shared by sum branches {a} and {b}")
        for p in part.exposed():
            counts[p] = counts.get(p, 0) + 1
        owner_ports.append(_all_ports(part))
    for p, c in counts.items():
        if c > 1:
            raise PortReused(f"port {p!r} is exposed by {c} parts")
    for a, b in itertools.combinations(range(len(owner_ports)), 2):
        clash = owner_ports[a] & owner_ports[b]
        if clash:
            raise PortReused(f"port {next(iter(clash))!r} occurs in two parts")
    in_edge = {}
    for hi, lo in n.edges:
        if hi.obj != dual(lo.obj):
            raise TypeMismatch(f"edge joins non-dual ports {hi!r} and {lo!r}")
        for p in (hi, lo):
            if p in in_edge:
                raise PortReused(f"port {p!r} is an endpoint of two edges")
            in_edge[p] = True
            if p not in counts:
                raise PortUnused(f"edge endpoint {p!r} is not exposed by any part")


def _resolve_order(n: Net, order):
    free = n.free_ports()
    if order is None:
        return sorted(free, key=lambda p: p.id)
    order = list(order)
    if len(order) != len(free) or set(order) != set(free):
        raise SignatureMismatch("order must list every free port exactly once")
    return order


# ---------------------------------------------------------------------------
# direct contraction


class _Factor:
    __slots__ = ("vars", "table")

    def __init__(self, vars_, table):
        self.vars = tuple(vars_)
        self.table = table


def _join(a: _Factor, b: _Factor) -> _Factor:
    shared = [v for v in a.vars if v in b.vars]
    b_only = [v for v in b.vars if v not in a.vars]
    pos_a = [a.vars.index(v) for v in shared]
    pos_b = [b.vars.index(v) for v in shared]
    pos_b_only = [b.vars.index(v) for v in b_only]
    index = {}
    for key, w in b.table.items():
        index.setdefault(tuple(key[i] for i in pos_b), []).append((key, w))
    out = {}
    for key, v in a.table.items():
        for bkey, w in index.get(tuple(key[i] for i in pos_a), ()):
            out[key + tuple(bkey[i] for i in pos_b_only)] = S.mul(v, w)
    return _Factor(a.vars + tuple(b_only), out)


def _sum_out(f: _Factor, var) -> _Factor:
    k = f.vars.index(var)
    acc = {}
    for key, v in f.table.items():
        acc.setdefault(key[:k] + key[k + 1:], []).append(v)
    table = {key: (S.simplify(S.add(*ts)) if len(ts) > 1 else ts[0]) for key, ts in acc.items()}
    return _Factor(f.vars[:k] + f.vars[k + 1:], table)


def _part_table(part, connection):
    """(ports, {tuple of native port indices: expr}) for one part."""
    if isinstance(part, Generator):
        n = len(part.ports)
        return list(part.ports), {tuple(split_lnest_ix(ix, n)): v
                                  for (ix, _), v in part.form.entries.items()}
    if isinstance(part, SumPart):
        ports = part.exposed()
        acc = {}
        for branch in part.branches:
            for key, v in _net_table(branch, ports, connection).items():
                acc.setdefault(key, []).append(v)
        return ports, {k: S.simplify(S.add(*ts)) if len(ts) > 1 else ts[0] for k, ts in acc.items()}
    body_ports = part.body.free_ports()
    body = _net_table(part.body, body_ports, connection)
    coords = enumerate_indices(part.direction.obj)
    table = {}
    for key, v in body.items():
        for c in coords:
            table[(c, *key)] = S.diff(v, c)
    if part.kind == "covariant":
        if connection is None:
            raise TypeMismatch("covariant derivative box needs a connection; expand derivatives first")
        for k, p in enumerate(body_ports):
            aff = connection(p.obj)
            by_target = {}
            for ((c, i), kk), a in aff.entries.items():
                by_target.setdefault(kk, []).append((c, i, a))
            for key, v in body.items():
                for c, i, a in by_target.get(key[k], ()):
                    out = (c, *key[:k], i, *key[k + 1:])
                    table[out] = S.sub(table.get(out, S.ZERO), S.mul(a, v))
    table = {k: S.simplify(v) for k, v in table.items()}
    return [part.direction, *body_ports], table


def _net_table(n: Net, order, connection) -> dict:
    var_of = {}
    for e, (hi, lo) in enumerate(n.edges):
        var_of[hi] = ("e", e, True)
        var_of[lo] = ("e", e, False)
    factors = []
    for part in n.parts:
        ports, table = _part_table(part, connection)
        vars_, flips = [], []
        for p in ports:
            tag = var_of.get(p)
            if tag is None:
                vars_.append(("p", p.id))
                flips.append(False)
            else:
                vars_.append(tag[:2])
                flips.append(tag[2])
        uniq = list(dict.fromkeys(vars_))
        out = {}
        for key, v in table.items():
            vals = {}
            ok = True
            for var, flip, x in zip(vars_, flips, key):
                x = ix_dual(x) if flip else x
                if vals.setdefault(var, x) != x:
                    ok = False
                    break
            if ok:
                out[tuple(vals[u] for u in uniq)] = v
        factors.append(_Factor(uniq, out))
    for e in range(len(n.edges)):
        var = ("e", e)
        hit = [f for f in factors if var in f.vars]
        rest = [f for f in factors if var not in f.vars]
        joined = hit[0]
        for f in hit[1:]:
            joined = _join(joined, f)
        factors = rest + [_sum_out(joined, var)]
    result = _Factor((), {(): S.ONE})
    for f in factors:
        result = _join(result, f)
    pos = [result.vars.index(("p", p.id)) for p in order]
    return {tuple(key[i] for i in pos): v for key, v in result.table.items()}


def eval_einsum(n: Net, order=None, connection=None) -> R.MatMorphism:
    """Contract the network directly into ``lnest(order) ⤳ 1``.

    ``order`` defaults to the free ports in creation order.  ``connection``
    maps an object ``o`` to its affinity ``T⊗o ⤳ o`` and is only needed
    for unexpanded covariant boxes.
    """
    check_linear(n)
    order = _resolve_order(n, order)
    table = _net_table(n, order, connection)
    return R.MatMorphism(lnest(p.obj for p in order), UNIT,
                         {(lnest_ix(key), ()): v for key, v in table.items()})


# ---------------------------------------------------------------------------
# extraction to point-free terms
#
# Port trees are nested 2-tuples with Port leaves.  The extraction tensors
# the parts side by side, bridges each edge with an η, and matches the
# resulting wire arrangement to the requested order by a network of
# associators and adjacent swaps.


def _tree_obj(tree):
    if isinstance(tree, Port):
        return tree.obj
    return Prod(_tree_obj(tree[0]), _tree_obj(tree[1]))


def _tree_leaves(tree):
    if isinstance(tree, Port):
        return [tree]
    return _tree_leaves(tree[0]) + _tree_leaves(tree[1])


def _lnest_tree(leaves):
    acc = leaves[0]
    for p in leaves[1:]:
        acc = (acc, p)
    return acc


def _append(xs, ys) -> R.Term:
    """``lnest(xs) ⊗ lnest(ys) ⤳ lnest(xs + ys)`` for non-empty port lists."""
    xo = lnest(p.obj for p in xs)
    if len(ys) == 1:
        return R.Id(Prod(xo, ys[0].obj))
    init = lnest(p.obj for p in ys[:-1])
    last = ys[-1].obj
    return R.comp(R.Ten(_append(xs, ys[:-1]), R.Id(last)), R.AlphaInv(xo, init, last))


def _to_lnest(tree) -> R.Term:
    """Structural iso ``tree ⤳ lnest(leaves(tree))``."""
    if isinstance(tree, Port):
        return R.Id(tree.obj)
    left, right = tree
    return R.comp(_append(_tree_leaves(left), _tree_leaves(right)),
                  R.Ten(_to_lnest(left), _to_lnest(right)))


def _swap_adjacent(objs, i) -> R.Term:
    """Swap positions ``i`` and ``i+1`` of a left-nested product of ``objs``."""
    a, b = objs[i], objs[i + 1]
    if i == 0:
        t = R.Sigma(a, b)
    else:
        A = lnest(objs[:i])
        t = R.comp(R.AlphaInv(A, b, a), R.Ten(R.Id(A), R.Sigma(a, b)), R.Alpha(A, a, b))
    for o in objs[i + 2:]:
        t = R.Ten(t, R.Id(o))
    return t


def _permute(src, dst) -> R.Term:
    """``lnest(src) ⤳ lnest(dst)`` for two orderings of the same ports."""
    cur = list(src)
    steps = []
    target = {p: k for k, p in enumerate(dst)}
    for end in range(len(cur) - 1, 0, -1):
        for i in range(end):
            if target[cur[i]] > target[cur[i + 1]]:
                steps.append(_swap_adjacent([p.obj for p in cur], i))
                cur[i], cur[i + 1] = cur[i + 1], cur[i]
    if not steps:
        return R.Id(lnest(p.obj for p in src))
    return R.comp(*reversed(steps))


def _part_term(part, connection) -> R.Term:
    if isinstance(part, Generator):
        return R.Prim(part.name, part.form, meta=part.meta)
    ports = part.exposed()
    if isinstance(part, SumPart):
        return R.Sum([to_morphism(b, ports, connection) for b in part.branches])
    mat = _box_matrix(part, ports, connection)
    body = to_morphism(part.body, part.body.free_ports(), connection)
    return R.Prim("∇" if part.kind == "covariant" else "∂", mat,
                  dom=lnest(p.obj for p in ports), cod=UNIT,
                  meta={"glyph": "deriv", "kind": part.kind, "body": body})


def _box_matrix(part, ports, connection):
    try:
        return eval_einsum(Net((part,)), ports, connection)
    except TypeMismatch:
        if part.kind == "covariant" and connection is None:
            return None
        raise


def to_morphism(n: Net, order=None, connection=None) -> R.Term:
    """Point-free term ``lnest(order objects) ⤳ 1`` equal to :func:`eval_einsum`."""
    check_linear(n)
    order = _resolve_order(n, order)

    # parts side by side: acc : tree ⤳ 1, scalars folded in through unitors
    acc, tree = None, None
    scalars = []
    for part in n.parts:
        t = _part_term(part, connection)
        ports = part.exposed()
        if not ports:
            scalars.append(t)
            continue
        ptree = _lnest_tree(ports)
        if acc is None:
            acc, tree = t, ptree
        else:
            acc = R.comp(R.RhoElim(UNIT), R.Ten(acc, t))
            tree = (tree, ptree)
    if acc is None:
        acc = R.Id(UNIT)
    for t in scalars:
        acc = R.comp(acc, t) if acc.dom == UNIT else R.comp(
            R.RhoElim(UNIT), R.Ten(acc, t), R.RhoIntro(acc.dom))

    # open wires: the requested order, then every edge as an η pair
    src = None
    wires = list(order)
    prep = R.Id(lnest(p.obj for p in order))
    if order:
        src = _lnest_tree(order)
    for hi, lo in n.edges:
        pair = (hi, lo)
        if src is None:
            prep = R.Comp(R.Eta(lo.obj), prep)
            src = pair
        else:
            so = _tree_obj(src)
            prep = R.comp(R.Ten(R.Id(so), R.Eta(lo.obj)), R.RhoIntro(so), prep)
            src = (src, pair)
        wires += [hi, lo]
    if tree is None:
        return acc if src is None else R.comp(acc, prep)  # pragma: no cover - edges imply parts
    body = _tree_leaves(tree)
    route = R.comp(R.invert(_to_lnest(tree)), _permute(_tree_leaves(src), body), _to_lnest(src))
    return R.comp(acc, route, prep)


# ---------------------------------------------------------------------------
# structure copies


def clone(n: Net, mapping=None, keep=()) -> Net:
    """Copy of ``n`` with fresh ports except those in ``keep``.

    ``mapping`` pre-assigns replacements for selected ports.
    """
    mapping = dict(mapping or {})
    keep = set(keep)

    def port(p):
        if p in keep:
            return p
        q = mapping.get(p)
        if q is None:
            q = mapping[p] = fresh_port(p.obj, p.label)
        return q

    def net(m):
        return Net(tuple(part_(x) for x in m.parts), tuple((port(h), port(l)) for h, l in m.edges))

    def part_(x):
        if isinstance(x, Generator):
            return Generator(x.name, x.form, tuple(port(p) for p in x.ports), x.meta)
        if isinstance(x, Box):
            return Box(x.kind, port(x.direction), net(x.body))
        return SumPart(tuple(net(b) for b in x.branches))

    return net(n)


def generators(n: Net):
    """All generators of ``n``, recursively."""
    for part in n.parts:
        if isinstance(part, Generator):
            yield part
        elif isinstance(part, Box):
            yield from generators(part.body)
        else:
            for b in part.branches:
                yield from generators(b)


def has_boxes(n: Net, kind=None) -> bool:
    for part in n.parts:
        if isinstance(part, Box):
            if kind is None or part.kind == kind:
                return True
            if has_boxes(part.body, kind):
                return True
        elif isinstance(part, SumPart) and any(has_boxes(b, kind) for b in part.branches):
            return True
    return False
