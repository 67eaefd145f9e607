"""Algebraic laws of the matrix semantics, checked on random instances.

Used by the ``laws`` command and by the test-suite.  Every check returns a
:class:`LawResult`; random morphisms are drawn from a seeded generator so
identical seeds reproduce identical runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from tensorcat import roger as R
from tensorcat import scalar as S
from tensorcat.objects import UNIT, Atom, Prod, Space, dual


@dataclass
class LawResult:
    name: str
    passed: bool
    detail: str = ""


def space(n: int) -> Space:
    return Space(f"R{n}", tuple(f"x{k}" for k in range(n)))


def sampling_domain(sp: Space) -> S.Domain:
    return S.Domain({c: (-2.0, 2.0) for c in sp.coords})


# ---------------------------------------------------------------------------
# random generators


def random_expr(rng, names, depth=3, singular=False) -> S.Expr:
    """A random scalar expression over ``names``.

    With ``singular=True`` reciprocals and logarithms may appear as well.
    """
    if depth <= 0 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return S.var(names[rng.integers(len(names))])
        return S.const_q(Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))))
    ops = ["add", "mul", "neg", "sin", "cos", "pow"]
    if singular:
        ops += ["recip", "log"]
    op = ops[rng.integers(len(ops))]
    sub = lambda: random_expr(rng, names, depth - 1, singular)  # noqa: E731
    if op == "add":
        return S.add(sub(), sub())
    if op == "mul":
        return S.mul(sub(), sub())
    if op == "neg":
        return S.neg(sub())
    if op == "sin":
        return S.sin_e(sub())
    if op == "cos":
        return S.cos_e(sub())
    if op == "pow":
        return S.int_pow(sub(), int(rng.integers(2, 4)))
    if op == "recip":
        return S.recip(sub())
    return S.log_e(sub())


def random_obj(rng, atom: Atom, max_leaves=2):
    """Random object with at most ``max_leaves`` non-unit factors."""
    def leaf():
        r = rng.random()
        return atom if r < 0.45 else dual(atom) if r < 0.9 else UNIT

    n = int(rng.integers(1, max_leaves + 1))
    o = leaf()
    for _ in range(n - 1):
        o = Prod(o, leaf()) if rng.random() < 0.5 else Prod(leaf(), o)
    return o


def random_morphism(rng, a, b, names, density=0.5, depth=2) -> R.MatMorphism:
    from tensorcat.objects import enumerate_indices

    entries = {}
    for i in enumerate_indices(a):
        for j in enumerate_indices(b):
            if rng.random() < density:
                entries[i, j] = random_expr(rng, names, depth)
    return R.MatMorphism(a, b, entries)


# ---------------------------------------------------------------------------
# named law instances


def snake_left(a) -> R.Term:
    """``a ⤳ a`` through ``(ε ⊗ id) ∘ ᾱ ∘ (id ⊗ η)``; the identity."""
    return R.comp(
        R.RhoElim(a),
        R.Sigma(UNIT, a),
        R.Ten(R.Eps(a), R.Id(a)),
        R.AlphaInv(a, dual(a), a),
        R.Ten(R.Id(a), R.Eta(a)),
        R.RhoIntro(a),
    )


def snake_right(a) -> R.Term:
    """``a* ⤳ a*`` through ``(id ⊗ ε) ∘ α ∘ (η ⊗ id)``; the identity."""
    d = dual(a)
    return R.comp(
        R.RhoElim(d),
        R.Ten(R.Id(d), R.Eps(a)),
        R.Alpha(d, a, d),
        R.Ten(R.Eta(a), R.Id(d)),
        R.Sigma(d, UNIT),
        R.RhoIntro(d),
    )


def trace_term(a) -> R.Term:
    """``ε ∘ σ ∘ η : 1 ⤳ 1``; evaluates to the dimension of ``a``."""
    return R.comp(R.Eps(a), R.Sigma(dual(a), a), R.Eta(a))


class _Checker:
    def __init__(self, sp: Space, seed: int, tol: float):
        self.sp = sp
        self.atom = Atom(sp)
        self.domain = sampling_domain(sp)
        self.rng = np.random.default_rng(seed)
        self.seed = seed
        self.tol = tol
        self.morphisms = 0

    def obj(self):
        return random_obj(self.rng, self.atom)

    def mor(self, a, b):
        self.morphisms += 1
        return random_morphism(self.rng, a, b, list(self.sp.coords))

    def eq(self, f, g):
        return R.equal_num(f, g, self.domain, trials=8, tol=self.tol, seed=self.seed)

    def eq_terms(self, s, t):
        return self.eq(R.eval_term(s, simplify=False), R.eval_term(t, simplify=False))


def _structural(ck: _Checker):
    a, b, c = ck.obj(), ck.obj(), ck.obj()
    yield "snake-left", ck.eq_terms(snake_left(a), R.Id(a))
    yield "snake-right", ck.eq_terms(snake_right(a), R.Id(dual(a)))
    yield "sigma-involution", ck.eq_terms(R.Comp(R.Sigma(b, a), R.Sigma(a, b)), R.Id(Prod(a, b)))
    yield "unitor-iso", (ck.eq_terms(R.Comp(R.RhoElim(a), R.RhoIntro(a)), R.Id(a))
                         and ck.eq_terms(R.Comp(R.RhoIntro(a), R.RhoElim(a)), R.Id(Prod(a, UNIT))))
    yield "associator-iso", (
        ck.eq_terms(R.Comp(R.AlphaInv(a, b, c), R.Alpha(a, b, c)), R.Id(Prod(Prod(a, b), c)))
        and ck.eq_terms(R.Comp(R.Alpha(a, b, c), R.AlphaInv(a, b, c)), R.Id(Prod(a, Prod(b, c)))))


def _bilinear(ck: _Checker):
    C = lambda g, f: R.compose(g, f, simplify=False)  # noqa: E731
    A = lambda f, g: R.add(f, g, simplify=False)  # noqa: E731
    T = R.tensor
    a, b, c, d = ck.obj(), ck.obj(), ck.obj(), ck.obj()
    s = random_expr(ck.rng, list(ck.sp.coords), 2)

    f, g, h = ck.mor(b, c), ck.mor(b, c), ck.mor(a, b)
    yield "comp-left-additive", ck.eq(C(A(f, g), h), A(C(f, h), C(g, h)))
    f, g, h = ck.mor(b, c), ck.mor(a, b), ck.mor(a, b)
    yield "comp-right-additive", ck.eq(C(f, A(g, h)), A(C(f, g), C(f, h)))
    f, g, h = ck.mor(a, b), ck.mor(a, b), ck.mor(c, d)
    yield "ten-left-additive", ck.eq(T(A(f, g), h), A(T(f, h), T(g, h)))
    f, g, h = ck.mor(a, b), ck.mor(c, d), ck.mor(c, d)
    yield "ten-right-additive", ck.eq(T(f, A(g, h)), A(T(f, g), T(f, h)))
    f, g = ck.mor(b, c), ck.mor(a, b)
    yield "comp-left-scalar", ck.eq(C(R.scale(s, f), g), R.scale(s, C(f, g)))
    f, g = ck.mor(b, c), ck.mor(a, b)
    yield "comp-right-scalar", ck.eq(C(f, R.scale(s, g)), R.scale(s, C(f, g)))
    f, g = ck.mor(a, b), ck.mor(c, d)
    yield "ten-left-scalar", ck.eq(T(R.scale(s, f), g), R.scale(s, T(f, g)))
    f, g = ck.mor(a, b), ck.mor(c, d)
    yield "ten-right-scalar", ck.eq(T(f, R.scale(s, g)), R.scale(s, T(f, g)))


def _naturality(ck: _Checker):
    a, b, c, d = ck.obj(), ck.obj(), ck.obj(), ck.obj()
    f, g = ck.mor(a, c), ck.mor(b, d)
    lhs = R.compose(R.sigma(c, d), R.tensor(f, g), simplify=False)
    rhs = R.compose(R.tensor(g, f), R.sigma(a, b), simplify=False)
    yield "sigma-natural", ck.eq(lhs, rhs)


def trace_checks(dims=(2, 3, 4)):
    for n in dims:
        m = R.eval_term(trace_term(Atom(space(n))))
        value = m[(), ()]
        ok = isinstance(value, S.Const) and value.value == n
        yield LawResult(f"trace-dim-{n}", ok, f"ε∘σ∘η = {value}")


def run_laws(dims=(2, 3), seed=0, morphisms=500, tol=1e-9):
    """Check every law family on random instances over spaces of ``dims``.

    Rounds repeat until ``morphisms`` random morphisms have been drawn in
    total.  Returns one aggregated :class:`LawResult` per law name.
    """
    dims = tuple(dims)
    checkers = [_Checker(space(n), seed + 7919 * k, tol) for k, n in enumerate(dims)]
    tally = {}
    total = 0
    while total < morphisms:
        for ck in checkers:
            for family in (_structural, _bilinear, _naturality):
                for name, ok in family(ck):
                    good, count = tally.get(name, (0, 0))
                    tally[name] = (good + bool(ok), count + 1)
        total = sum(ck.morphisms for ck in checkers)
    out = [LawResult(name, good == count, f"{good}/{count} instances")
           for name, (good, count) in tally.items()]
    out.extend(trace_checks(sorted(set(dims) | {2, 3, 4})))
    return out, total
