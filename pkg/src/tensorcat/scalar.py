"""Symbolic scalar fields over coordinate variables.

Expressions are immutable trees built from a small grammar (rational
constants, symbols, sums, products, negation, reciprocal, integer powers,
``sin``, ``cos``, ``log``).  The smart constructors below apply the cheap
algebraic identities immediately; :func:`simplify` does a heavier pass
(like-term collection, exponent merging) but makes no claim of reaching a
canonical form.  Deciding whether an expression vanishes is done
numerically by :func:`is_zero`.

>>> rho = var("rho")
>>> str(diff(-log_e(rho), "rho"))
'-rho^(-1)'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from tensorcat.errors import EvalSingular, ParseError, SamplingExhausted, UnboundSymbol

__all__ = [
    "Expr", "Const", "Symbol", "Add", "Mul", "Neg", "Recip", "IntPow", "Sin", "Cos", "Log",
    "ZERO", "ONE", "const_q", "var", "as_expr", "add", "sub", "mul", "div", "neg", "recip",
    "int_pow", "sin_e", "cos_e", "log_e", "diff", "eval_num", "simplify", "free_symbols",
    "Domain", "is_zero", "is_zero_all", "sample_points", "render", "parse_scalar", "parse_env",
]

# Smallest magnitude accepted as a divisor by eval_num.
SINGULAR_EPS = 1e-300


class Expr:
    """Base class of scalar expression nodes.

    Nodes are hash-consed only by value: equality is structural and the hash
    is cached at construction, so expressions work as dictionary keys.
    """

    __slots__ = ("_hash", "_text", "_free")

    def _init_cache(self, h):
        self._hash = h
        self._text = None
        self._free = None

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr) or self._hash != other._hash:
            return False
        return type(self) is type(other) and self._fields() == other._fields()

    def __ne__(self, other):
        return not self == other

    def _fields(self):
        raise NotImplementedError

    def __str__(self):
        if self._text is None:
            self._text = render(self)
        return self._text

    def __repr__(self):
        return f"{type(self).__name__}<{self}>"

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return int_pow(self, n)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = Fraction(value)
        self._init_cache(hash(("Const", self.value)))

    def _fields(self):
        return (self.value,)


class Symbol(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        if not name:
            raise ValueError("symbol name must be non-empty")
        self.name = name
        self._init_cache(hash(("Symbol", name)))

    def _fields(self):
        return (self.name,)


class _Nary(Expr):
    __slots__ = ("args",)
    tag = ""

    def __init__(self, args):
        args = tuple(args)
        if not args:
            raise ValueError(f"{type(self).__name__} needs at least one operand")
        self.args = args
        self._init_cache(hash((self.tag, args)))

    def _fields(self):
        return self.args


class Add(_Nary):
    __slots__ = ()
    tag = "Add"


class Mul(_Nary):
    __slots__ = ()
    tag = "Mul"


class _Unary(Expr):
    __slots__ = ("arg",)
    tag = ""

    def __init__(self, arg: Expr):
        self.arg = arg
        self._init_cache(hash((self.tag, arg)))

    def _fields(self):
        return (self.arg,)


class Neg(_Unary):
    __slots__ = ()
    tag = "Neg"


class Recip(_Unary):
    __slots__ = ()
    tag = "Recip"


class Sin(_Unary):
    __slots__ = ()
    tag = "Sin"


class Cos(_Unary):
    __slots__ = ()
    tag = "Cos"


class Log(_Unary):
    __slots__ = ()
    tag = "Log"


class IntPow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: int):
        self.base = base
        self.exp = int(exp)
        self._init_cache(hash(("IntPow", base, self.exp)))

    def _fields(self):
        return (self.base, self.exp)


ZERO = Const(0)
ONE = Const(1)
MINUS_ONE = Const(-1)


# ---------------------------------------------------------------------------
# smart constructors


def const_q(q) -> Const:
    """Exact rational constant; floats are converted through their decimal text."""
    if isinstance(q, float):
        q = Fraction(repr(q))
    return Const(q)


def var(name: str) -> Symbol:
    return Symbol(name)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (Rational, float)):
        return const_q(x)
    if isinstance(x, str):
        return Symbol(x)
    raise TypeError(f"cannot convert {x!r} to a scalar expression")


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def add(*terms) -> Expr:
    flat = []
    total = Fraction(0)
    for t in terms:
        t = as_expr(t)
        items = t.args if isinstance(t, Add) else (t,)
        for item in items:
            if isinstance(item, Const):
                total += item.value
            else:
                flat.append(item)
    if not flat:
        return Const(total)
    if total != 0:
        flat.insert(0, Const(total))
    if len(flat) == 1:
        return flat[0]
    return Add(flat)


def sub(a, b) -> Expr:
    return add(a, neg(as_expr(b)))


def mul(*factors) -> Expr:
    flat = []
    coeff = Fraction(1)
    for f in factors:
        f = as_expr(f)
        if isinstance(f, Neg):
            coeff = -coeff
            f = f.arg
        items = f.args if isinstance(f, Mul) else (f,)
        for item in items:
            if isinstance(item, Const):
                coeff *= item.value
            else:
                flat.append(item)
    if coeff == 0:
        return ZERO
    if len(flat) > 1:
        flat = _merge_powers(flat)
    if not flat:
        return Const(coeff)
    if coeff == -1:
        return neg(flat[0] if len(flat) == 1 else Mul(flat))
    if coeff != 1:
        flat.insert(0, Const(coeff))
    if len(flat) == 1:
        return flat[0]
    return Mul(flat)


def _base_exp(e):
    if isinstance(e, IntPow):
        return e.base, e.exp
    if isinstance(e, Recip):
        return e.arg, -1
    return e, 1


def _merge_powers(flat):
    exps = {}
    for f in flat:
        b, k = _base_exp(f)
        exps[b] = exps.get(b, 0) + k
    if len(exps) == len(flat):
        return flat
    return [int_pow(b, k) for b, k in exps.items() if k != 0]


def div(a, b) -> Expr:
    return mul(a, recip(as_expr(b)))


def neg(x) -> Expr:
    x = as_expr(x)
    if isinstance(x, Const):
        return Const(-x.value)
    if isinstance(x, Neg):
        return x.arg
    if isinstance(x, Mul) and isinstance(x.args[0], Const):
        return mul(Const(-x.args[0].value), *x.args[1:])
    return Neg(x)


def recip(x) -> Expr:
    x = as_expr(x)
    if isinstance(x, Const) and x.value != 0:
        return Const(1 / x.value)
    if isinstance(x, Recip):
        return x.arg
    if isinstance(x, IntPow):
        return int_pow(x.base, -x.exp)
    return Recip(x)


def int_pow(x, n: int) -> Expr:
    x = as_expr(x)
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return x
    if isinstance(x, Const) and (x.value != 0 or n > 0):
        return Const(x.value ** n)
    if isinstance(x, IntPow):
        return int_pow(x.base, x.exp * n)
    if isinstance(x, Recip):
        return int_pow(x.arg, -n)
    if n == -1:
        return Recip(x)
    return IntPow(x, n)


def sin_e(x) -> Expr:
    x = as_expr(x)
    return ZERO if _is_const(x, 0) else Sin(x)


def cos_e(x) -> Expr:
    x = as_expr(x)
    return ONE if _is_const(x, 0) else Cos(x)


def log_e(x) -> Expr:
    x = as_expr(x)
    return ZERO if _is_const(x, 1) else Log(x)


# ---------------------------------------------------------------------------
# structural queries


def children(e: Expr):
    if isinstance(e, _Nary):
        return e.args
    if isinstance(e, _Unary):
        return (e.arg,)
    if isinstance(e, IntPow):
        return (e.base,)
    return ()


def free_symbols(e: Expr) -> frozenset:
    if e._free is None:
        if isinstance(e, Symbol):
            e._free = frozenset((e.name,))
        elif isinstance(e, Const):
            e._free = frozenset()
        else:
            acc = frozenset()
            for c in children(e):
                acc = acc | free_symbols(c)
            e._free = acc
    return e._free


def rebuild(e: Expr, new_children) -> Expr:
    """Re-apply the smart constructor of ``e`` to new children."""
    if isinstance(e, Add):
        return add(*new_children)
    if isinstance(e, Mul):
        return mul(*new_children)
    if isinstance(e, IntPow):
        return int_pow(new_children[0], e.exp)
    ctor = {Neg: neg, Recip: recip, Sin: sin_e, Cos: cos_e, Log: log_e}[type(e)]
    return ctor(new_children[0])


# ---------------------------------------------------------------------------
# differentiation


def diff(e: Expr, v: str) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to symbol ``v``."""
    memo: dict = {}

    def d(x):
        if v not in free_symbols(x):
            return ZERO
        hit = memo.get(x)
        if hit is not None:
            return hit
        if isinstance(x, Symbol):
            r = ONE
        elif isinstance(x, Add):
            r = add(*(d(t) for t in x.args))
        elif isinstance(x, Mul):
            terms = []
            for i, f in enumerate(x.args):
                df = d(f)
                if not _is_const(df, 0):
                    terms.append(mul(*x.args[:i], df, *x.args[i + 1:]))
            r = add(*terms)
        elif isinstance(x, Neg):
            r = neg(d(x.arg))
        elif isinstance(x, Recip):
            r = neg(mul(d(x.arg), int_pow(x.arg, -2)))
        elif isinstance(x, IntPow):
            r = mul(Const(x.exp), int_pow(x.base, x.exp - 1), d(x.base))
        elif isinstance(x, Sin):
            r = mul(cos_e(x.arg), d(x.arg))
        elif isinstance(x, Cos):
            r = neg(mul(sin_e(x.arg), d(x.arg)))
        elif isinstance(x, Log):
            r = mul(d(x.arg), recip(x.arg))
        else:  # pragma: no cover
            raise TypeError(type(x))
        memo[x] = r
        return r

    return d(e)


# ---------------------------------------------------------------------------
# numeric evaluation


def eval_num(e: Expr, env) -> float:
    """Evaluate ``e`` in double precision at the point ``env``.

    Raises :class:`EvalSingular` on division by (numerically) zero or the
    logarithm of a non-positive number, :class:`UnboundSymbol` when ``env``
    lacks a symbol.
    """
    memo: dict = {}

    def ev(x):
        hit = memo.get(x)
        if hit is not None:
            return hit
        if isinstance(x, Const):
            r = float(x.value)
        elif isinstance(x, Symbol):
            try:
                r = float(env[x.name])
            except KeyError:
                raise UnboundSymbol(f"no value bound for symbol {x.name!r}") from None
        elif isinstance(x, Add):
            r = math.fsum(ev(t) for t in x.args)
        elif isinstance(x, Mul):
            r = 1.0
            for f in x.args:
                r *= ev(f)
        elif isinstance(x, Neg):
            r = -ev(x.arg)
        elif isinstance(x, Recip):
            a = ev(x.arg)
            if abs(a) < SINGULAR_EPS:
                raise EvalSingular(f"division by zero in {x}")
            r = 1.0 / a
        elif isinstance(x, IntPow):
            a = ev(x.base)
            if x.exp < 0 and abs(a) < SINGULAR_EPS:
                raise EvalSingular(f"negative power of zero in {x}")
            r = a ** x.exp
        elif isinstance(x, Sin):
            r = math.sin(ev(x.arg))
        elif isinstance(x, Cos):
            r = math.cos(ev(x.arg))
        elif isinstance(x, Log):
            a = ev(x.arg)
            if a <= 0.0:
                raise EvalSingular(f"log of non-positive value in {x}")
            r = math.log(a)
        else:  # pragma: no cover
            raise TypeError(type(x))
        if not math.isfinite(r):
            raise EvalSingular(f"non-finite value in {x}")
        memo[x] = r
        return r

    try:
        return ev(e)
    except OverflowError as exc:
        raise EvalSingular(str(exc)) from None


# ---------------------------------------------------------------------------
# simplification
#
# An expression is brought into a "polynomial" view: a map from monomials
# to rational coefficients, where a monomial is a product of opaque bases
# (symbols, function applications, irreducible sums) raised to integer
# exponents.  Sums with positive exponent are distributed only while the
# result stays small.

_DISTRIBUTE_CAP = 16


def _sort_key(e: Expr) -> str:
    return str(e)


class _Poly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        # frozenset(monomial items) -> [coeff, ordered items]
        self.terms = terms if terms is not None else {}

    @classmethod
    def const(cls, c):
        p = cls()
        if c != 0:
            p.terms[frozenset()] = [Fraction(c), ()]
        return p

    @classmethod
    def base(cls, b: Expr, exp: int = 1):
        p = cls()
        items = ((b, exp),)
        p.terms[frozenset(items)] = [Fraction(1), items]
        return p

    def add_into(self, other, scale=1):
        for key, (c, items) in other.terms.items():
            slot = self.terms.get(key)
            if slot is None:
                self.terms[key] = [c * scale, items]
            else:
                slot[0] += c * scale
        return self

    def scaled(self, s):
        return _Poly({k: [c * s, items] for k, (c, items) in self.terms.items()})

    def times(self, other):
        out = _Poly()
        for _, (c1, i1) in self.terms.items():
            for _, (c2, i2) in other.terms.items():
                items = _merge_items(i1, i2)
                key = frozenset(items)
                slot = out.terms.get(key)
                if slot is None:
                    out.terms[key] = [c1 * c2, items]
                else:
                    slot[0] += c1 * c2
        return out

    def cleaned(self):
        self.terms = {k: v for k, v in self.terms.items() if v[0] != 0}
        return self

    def single_term(self):
        if len(self.terms) == 1:
            (c, items), = self.terms.values()
            return c, items
        return None

    def to_expr(self) -> Expr:
        self.cleaned()
        _pythagoras(self)
        if not self.terms:
            return ZERO
        rendered = [_term_expr(c, items) for c, items in self.terms.values()]
        rendered.sort(key=_sort_key)
        # constants last-first convention: put a bare constant in front
        consts = [t for t in rendered if isinstance(t, Const)]
        others = [t for t in rendered if not isinstance(t, Const)]
        return add(*consts, *others)


def _pythagoras(p: _Poly):
    """Apply sin²x + cos²x = 1 between pairs of terms sharing all other factors.

    With s = sin(x), k = cos(x) and a common cofactor c·M:
    s^a·k^b + s^(a-2)·k^(b+2) → s^(a-2)·k^b,
    s^a·k^b − s^(a+2)·k^b → s^a·k^(b+2),
    s^a·k^b − s^a·k^(b+2) → s^(a+2)·k^b.
    Every rewrite removes a term, so the loop terminates.
    """
    rules = (((-2, 2), 1, (-2, 0)), ((2, 0), -1, (0, 2)), ((0, 2), -1, (2, 0)))
    while True:
        trig_args = {b.arg for key in p.terms for b, _ in key if isinstance(b, (Sin, Cos))}
        if not trig_args or not _pythagoras_step(p, trig_args, rules):
            return


def _pythagoras_step(p, trig_args, rules):
    for x in trig_args:
        sx, cx = Sin(x), Cos(x)
        for key, (c, items) in list(p.terms.items()):
            ex = dict(items)
            a, b = ex.get(sx, 0), ex.get(cx, 0)
            for (da, db), sign, (ra, rb) in rules:
                partner = dict(ex)
                partner[sx], partner[cx] = a + da, b + db
                pkey = frozenset((k, v) for k, v in partner.items() if v != 0)
                other = p.terms.get(pkey)
                if other is None or pkey == key or other[0] != sign * c:
                    continue
                merged = dict(ex)
                merged[sx], merged[cx] = a + ra, b + rb
                new_items = tuple((k, v) for k, v in merged.items() if v != 0)
                del p.terms[key], p.terms[pkey]
                nkey = frozenset(new_items)
                slot = p.terms.get(nkey)
                if slot is None:
                    p.terms[nkey] = [c, new_items]
                else:
                    slot[0] += c
                p.cleaned()
                return True
    return False


def _merge_items(i1, i2):
    exps = {}
    order = []
    for b, e in i1 + i2:
        if b in exps:
            exps[b] += e
        else:
            exps[b] = e
            order.append(b)
    return tuple((b, exps[b]) for b in order if exps[b] != 0)


def _term_expr(c, items) -> Expr:
    items = sorted(items, key=lambda it: (_sort_key(it[0]), it[1]))
    factors = [int_pow(b, e) for b, e in items]
    return mul(Const(c), *factors)


def _poly_pow(p: _Poly, n: int) -> _Poly:
    single = p.single_term()
    if single is not None:
        c, items = single
        if c == 0:
            return _Poly() if n > 0 else _Poly.base(ZERO, n)
        out = _Poly()
        new_items = tuple((b, e * n) for b, e in items)
        out.terms[frozenset(new_items)] = [c ** n, new_items]
        return out
    if not p.terms:
        return _Poly() if n > 0 else _Poly.base(ZERO, n)
    if n > 0 and len(p.terms) ** n <= _DISTRIBUTE_CAP:
        out = _Poly.const(1)
        for _ in range(n):
            out = out.times(p).cleaned()
        return out
    return _Poly.base(p.to_expr(), n)


def _to_poly(e: Expr, memo) -> _Poly:
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        p = _Poly.const(e.value)
    elif isinstance(e, Symbol):
        p = _Poly.base(e)
    elif isinstance(e, Add):
        p = _Poly()
        for t in e.args:
            p.add_into(_to_poly(t, memo))
        p.cleaned()
    elif isinstance(e, Neg):
        p = _to_poly(e.arg, memo).scaled(-1)
    elif isinstance(e, Recip):
        p = _poly_pow(_to_poly(e.arg, memo), -1)
    elif isinstance(e, IntPow):
        p = _poly_pow(_to_poly(e.base, memo), e.exp)
    elif isinstance(e, Mul):
        p = _mul_polys([_to_poly(f, memo) for f in e.args])
    elif isinstance(e, (Sin, Cos, Log)):
        inner = simplify_memo(e.arg, memo)
        p = _to_poly(rebuild(e, [inner]), {}) if isinstance(rebuild(e, [inner]), Const) \
            else _Poly.base(type(e)(inner))
    else:  # pragma: no cover
        raise TypeError(type(e))
    memo[e] = p
    return p


def _mul_polys(polys) -> _Poly:
    # Gather monomial factors and multi-term sums separately so that a sum
    # and its reciprocal meet as the same base before anything is distributed.
    coeff = Fraction(1)
    items = ()
    sums = []
    for p in polys:
        single = p.single_term()
        if not p.terms:
            return _Poly()
        if single is not None:
            c, its = single
            coeff *= c
            items = _merge_items(items, its)
        else:
            sums.append(p)
    # sums that appear as bases (after reciprocal powers) are merged via items;
    # plain multi-term factors are candidates for distribution.
    merged = {}
    order = []
    for s in sums:
        key = s.to_expr()
        if key in merged:
            merged[key][1] += 1
        else:
            merged[key] = [s, 1]
            order.append(key)
    keep = []
    base_items = dict(items)
    for key in order:
        s, n = merged[key]
        if key in base_items:
            base_items[key] += n
        else:
            keep.append((s, n, key))
    items = tuple((b, e) for b, e in base_items.items() if e != 0)
    out = _Poly()
    out.terms[frozenset(items)] = [coeff, items]
    for s, n, key in keep:
        size = len(out.terms) * len(s.terms) ** n
        if size <= _DISTRIBUTE_CAP:
            for _ in range(n):
                out = out.times(s).cleaned()
        else:
            out = out.times(_Poly.base(key, n))
    # a base may have been re-introduced as an explicit sum: fold again
    return out.cleaned()


def simplify_memo(e: Expr, memo) -> Expr:
    return _to_poly(e, memo).to_expr()


def simplify(e: Expr) -> Expr:
    """Semantically equal expression with constants folded and like terms collected."""
    e = as_expr(e)
    if isinstance(e, (Const, Symbol)):
        return e
    return simplify_memo(e, {})


# ---------------------------------------------------------------------------
# sampling-based zero test


@dataclass(frozen=True)
class Domain:
    """Open sampling box for the coordinates plus fixed values for parameters.

    ``intervals`` maps a symbol to ``(lower, upper)``; ``fixed`` binds named
    constants such as ``r_s`` or ``c`` to a single value.
    """

    intervals: dict = field(default_factory=dict)
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, (lo, hi) in self.intervals.items():
            if not lo < hi:
                raise ValueError(f"degenerate interval for {name}: ({lo}, {hi})")

    def __hash__(self):
        return hash((tuple(sorted(self.intervals.items())), tuple(sorted(self.fixed.items()))))

    @property
    def symbols(self):
        return set(self.intervals) | set(self.fixed)

    def with_fixed(self, **values):
        return Domain(dict(self.intervals), {**self.fixed, **values})


def sample_points(domain: Domain, names, n: int, rng) -> np.ndarray:
    """``n`` points as an array of shape ``(n, len(names))``."""
    cols = []
    for name in names:
        if name in domain.fixed:
            cols.append(np.full(n, float(domain.fixed[name])))
        elif name in domain.intervals:
            lo, hi = domain.intervals[name]
            cols.append(rng.uniform(lo, hi, size=n))
        else:
            raise UnboundSymbol(f"symbol {name!r} is not covered by the sampling domain")
    if not cols:
        return np.zeros((n, 0))
    return np.column_stack(cols)


def _evaluate_samples(exprs, domain, trials, seed, max_retries):
    from tensorcat.kernels import compile_exprs, run_program

    program = compile_exprs(exprs)
    rng = np.random.default_rng(seed)
    good = []
    have = 0
    drawn = 0
    cap = trials * max_retries
    while have < trials:
        need = trials - have
        if drawn + need > cap:
            raise SamplingExhausted(
                f"could not find {trials} non-singular sample points in {cap} draws")
        pts = sample_points(domain, program.variables, need, rng)
        drawn += need
        values, bad = run_program(program, pts)
        good.append(values[:, ~bad])
        have += good[-1].shape[1]
    return np.concatenate(good, axis=1)


def is_zero(e: Expr, domain: Domain, trials: int = 50, tol: float = 1e-9,
            seed: int = 0, max_retries: int = 20) -> bool:
    """True iff ``|e| < tol`` at ``trials`` random non-singular points of ``domain``."""
    return is_zero_all([e], domain, trials, tol, seed, max_retries)


def is_zero_all(exprs, domain: Domain, trials: int = 50, tol: float = 1e-9,
                seed: int = 0, max_retries: int = 20) -> bool:
    """Joint zero test: every expression vanishes at shared sample points."""
    if trials < 1 or tol <= 0:
        raise ValueError("trials must be >= 1 and tol > 0")
    exprs = [as_expr(e) for e in exprs]
    exprs = [e for e in exprs if not _is_const(e, 0)]
    if not exprs:
        return True
    if any(isinstance(e, Const) for e in exprs):
        return False
    values = _evaluate_samples(exprs, domain, trials, seed, max_retries)
    return bool(np.all(np.abs(values) < tol))


def max_abs(exprs, domain: Domain, trials: int = 50, seed: int = 0, max_retries: int = 20):
    """Largest magnitude over the sampled points; handy for diagnostics."""
    exprs = [as_expr(e) for e in exprs]
    values = _evaluate_samples(exprs, domain, trials, seed, max_retries)
    return float(np.max(np.abs(values))) if values.size else 0.0


# ---------------------------------------------------------------------------
# text rendering and parsing

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _const_text(v: Fraction):
    if v.denominator == 1:
        return str(v.numerator), (_PREC_ATOM if v >= 0 else _PREC_NEG)
    return f"{v.numerator}/{v.denominator}", _PREC_MUL


def _render(e: Expr):
    """Return (text, precedence)."""
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Symbol):
        return e.name, _PREC_ATOM
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.args):
            if i and isinstance(t, Neg):
                parts.append(" - " + _wrap(t.arg, _PREC_MUL))
            elif i and isinstance(t, Const) and t.value < 0:
                parts.append(" - " + _wrap(Const(-t.value), _PREC_MUL))
            else:
                parts.append((" + " if i else "") + _wrap(t, _PREC_ADD if not i else _PREC_MUL))
        return "".join(parts), _PREC_ADD
    if isinstance(e, Mul):
        return "*".join(_wrap(f, _PREC_POW) for f in e.args), _PREC_MUL
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _PREC_MUL), _PREC_NEG
    if isinstance(e, Recip):
        return _wrap(e.arg, _PREC_ATOM) + "^(-1)", _PREC_POW
    if isinstance(e, IntPow):
        ex = str(e.exp) if e.exp >= 0 else f"({e.exp})"
        return _wrap(e.base, _PREC_ATOM) + "^" + ex, _PREC_POW
    if isinstance(e, (Sin, Cos, Log)):
        return f"{type(e).__name__.lower()}({render(e.arg)})", _PREC_ATOM
    raise TypeError(type(e))  # pragma: no cover


def _wrap(e, prec):
    text, p = _render(e)
    return text if p >= prec else f"({text})"


def render(e: Expr) -> str:
    """Infix text with ``^`` for integer powers and ``sin(x)``-style calls."""
    return _render(e)[0]


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")
_FUNCS = {"sin": sin_e, "cos": cos_e, "log": log_e}


class _ScalarParser:
    def __init__(self, text):
        self.text = text
        self.tokens = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos and not text[pos:].strip():
                break
            if m.group(0).strip() == "":
                break
            kind = "num" if m.group(1) else "id" if m.group(2) else "op"
            self.tokens.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
            pos = m.end()
        self.i = 0

    def error(self, msg):
        col = self.tokens[self.i][2] + 1 if self.i < len(self.tokens) else len(self.text) + 1
        raise ParseError(f"{msg} in scalar expression {self.text!r}", 1, col)

    def peek(self):
        return self.tokens[self.i][1] if self.i < len(self.tokens) else None

    def take(self, value=None):
        if self.i >= len(self.tokens):
            self.error("unexpected end")
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            self.error(f"expected {value!r}")
        self.i += 1
        return tok

    def parse(self):
        e = self.expr()
        if self.i != len(self.tokens):
            self.error("unexpected trailing input")
        return e

    def expr(self):
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            e = add(e, t) if op == "+" else sub(e, t)
        return e

    def term(self):
        e = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()[1]
            f = self.unary()
            e = mul(e, f) if op == "*" else div(e, f)
        return e

    def unary(self):
        if self.peek() == "-":
            self.take()
            return neg(self.unary())
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def exponent(self):
        paren = self.peek() == "("
        if paren:
            self.take("(")
        sign = 1
        if self.peek() == "-":
            self.take()
            sign = -1
        kind, text, _ = self.take()
        if kind != "num" or not text.isdigit():
            self.error("exponent must be an integer")
        if paren:
            self.take(")")
        return sign * int(text)

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            return int_pow(base, self.exponent())
        return base

    def atom(self):
        kind, text, _ = self.take()
        if kind == "num":
            return const_q(Fraction(text))
        if kind == "id":
            if text in _FUNCS and self.peek() == "(":
                self.take("(")
                arg = self.expr()
                self.take(")")
                return _FUNCS[text](arg)
            return Symbol(text)
        if text == "(":
            e = self.expr()
            self.take(")")
            return e
        self.i -= 1
        self.error(f"unexpected {text!r}")


def parse_scalar(text: str) -> Expr:
    """Parse the textual syntax produced by :func:`render`."""
    if not text.strip():
        raise ParseError("empty scalar expression", 1, 1)
    return _ScalarParser(text).parse()


def parse_env(text: str) -> dict:
    """Parse a point such as ``rho=2.0,theta=0.3`` into a symbol map."""
    env = {}
    for chunk in filter(None, (c.strip() for c in text.split(","))):
        name, sep, value = chunk.partition("=")
        if not sep or not name.strip():
            raise ParseError(f"expected NAME=VALUE, got {chunk!r}", 1, text.find(chunk) + 1)
        try:
            env[name.strip()] = float(value)
        except ValueError:
            raise ParseError(f"bad number {value!r}", 1, text.find(chunk) + 1) from None
    return env
