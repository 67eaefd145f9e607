"""Tensor calculus on a single coordinate chart.

A :class:`CoordSystem` carries coordinate names, a symbolic metric and a
sampling domain.  From it we derive the cometric, Christoffel symbols
(Levi-Civita connection), the affinity of any object, partial and
covariant derivatives of matrix morphisms, Riemann/Ricci/scalar
curvature and the left-hand side of the Einstein equation.

Index conventions: ``christoffel(cs)[i][j][k]`` is Γ_ij^k and
``curvature(cs)[l][i][j][k]`` is R^l_ijk with
R^l_ijk = ∂_iΓ_jk^l − ∂_jΓ_ik^l + Γ_im^lΓ_jk^m − Γ_jn^lΓ_ik^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from tensorcat import albert as A
from tensorcat import roger as R
from tensorcat import scalar as S
from tensorcat.errors import SingularMetric, TypeMismatch
from tensorcat.objects import (
    UNIT, Atom, Dual, DualIx, Obj, Prod, Space, dual, enumerate_indices,
)

class CoordSystem:
    """Coordinates, symmetric metric and a sampling domain for zero tests."""

    def __init__(self, name: str, coords, metric, domain: S.Domain, check=True):
        self.name = name
        self.coords = tuple(coords)
        self.space = Space(name, self.coords)
        self.atom = Atom(self.space)
        self.metric = [[S.as_expr(x) for x in row] for row in metric]
        self.domain = domain
        d = len(self.coords)
        if len(self.metric) != d or any(len(row) != d for row in self.metric):
            raise TypeMismatch(f"metric of {name} must be {d}×{d}")
        if check:
            asym = [S.sub(self.metric[i][j], self.metric[j][i])
                    for i in range(d) for j in range(i + 1, d)
                    if self.metric[i][j] != self.metric[j][i]]
            if asym and not S.is_zero_all(asym, domain):
                raise TypeMismatch(f"metric of {name} is not symmetric")
        self._cometric = None
        self._christoffel = None
        self._curvature = None
        self._affinity = {}

    @property
    def dim(self):
        return len(self.coords)

    def __repr__(self):
        return f"CoordSystem({self.name}, {self.coords})"

    def metric_morphism(self) -> R.MatMorphism:
        """g : T⊗T ⤳ 1."""
        c = self.coords
        return R.MatMorphism(Prod(self.atom, self.atom), UNIT, {
            ((c[i], c[j]), ()): self.metric[i][j] for i in range(self.dim) for j in range(self.dim)})

    def cometric_morphism(self) -> R.MatMorphism:
        """g′ : 1 ⤳ T⊗T."""
        gp = cometric(self)
        c = self.coords
        return R.MatMorphism(UNIT, Prod(self.atom, self.atom), {
            ((), (c[i], c[j])): gp[i][j] for i in range(self.dim) for j in range(self.dim)})

    def connection(self, o: Obj) -> R.MatMorphism:
        """Affinity at ``o``; handy as the ``connection`` hook of albert evaluators."""
        return affinity(self, o)

    def with_domain(self, domain):
        cs = CoordSystem(self.name, self.coords, self.metric, domain, check=False)
        return cs


# ---------------------------------------------------------------------------
# builders


def polar() -> CoordSystem:
    rho = S.var("rho")
    return CoordSystem("polar", ("rho", "theta"), [[S.ONE, S.ZERO], [S.ZERO, rho ** 2]],
                       S.Domain({"rho": (0.1, 10.0), "theta": (0.05, math.pi - 0.05)}))


def schwarzschild(rs: float = 1.0, c: float = 1.0) -> CoordSystem:
    """Exterior Schwarzschild metric in (t, rho, theta, phi) with symbols r_s and c."""
    rho, theta, r_s, cc = S.var("rho"), S.var("theta"), S.var("r_s"), S.var("c")
    f = 1 - r_s / rho
    g = [[S.ZERO] * 4 for _ in range(4)]
    g[0][0] = -f * cc ** 2
    g[1][1] = f ** -1
    g[2][2] = rho ** 2
    g[3][3] = (rho * S.sin_e(theta)) ** 2
    dom = S.Domain({"t": (-10.0, 10.0), "rho": (1.5 * rs, 20.0 * rs),
                    "theta": (0.05, math.pi - 0.05), "phi": (0.0, 2 * math.pi)},
                   {"r_s": rs, "c": c})
    return CoordSystem("schwarzschild", ("t", "rho", "theta", "phi"), g, dom)


def euclidean(coords=("x", "y"), name="cartesian") -> CoordSystem:
    d = len(coords)
    g = [[S.ONE if i == j else S.ZERO for j in range(d)] for i in range(d)]
    return CoordSystem(name, coords, g, S.Domain({c: (-5.0, 5.0) for c in coords}))


SYSTEMS = {"polar": polar, "schwarzschild": schwarzschild, "euclidean": euclidean}


# ---------------------------------------------------------------------------
# metric inverse


def _pivot_ok(e, domain, trials=8) -> bool:
    """Nonzero at every sample of the domain (so symbolic division is safe there)."""
    if isinstance(e, S.Const):
        return e.value != 0
    from tensorcat.kernels import compile_exprs, run_program
    import numpy as np

    prog = compile_exprs([e])
    pts = S.sample_points(domain, prog.variables, trials, np.random.default_rng(7))
    vals, bad = run_program(prog, pts)
    good = vals[0][~bad]
    return good.size > 0 and bool(np.all(np.abs(good) > 1e-12))


def inverse_matrix(m, domain: S.Domain):
    """Symbolic Gauss–Jordan inverse with pivots validated numerically on ``domain``."""
    n = len(m)
    a = [[S.as_expr(x) for x in row] + [S.ONE if i == j else S.ZERO for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if _pivot_ok(a[r][col], domain)), None)
        if piv is None:
            raise SingularMetric(f"no usable pivot in column {col}")
        a[col], a[piv] = a[piv], a[col]
        inv = S.recip(a[col][col])
        a[col] = [S.simplify(S.mul(x, inv)) for x in a[col]]
        for r in range(n):
            if r == col or a[r][col] == S.ZERO:
                continue
            f = a[r][col]
            a[r] = [S.simplify(S.sub(x, S.mul(f, y))) for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def cometric(cs: CoordSystem):
    """g′ with g·g′ = δ; raises :class:`SingularMetric` when that fails."""
    if cs._cometric is None:
        gp = inverse_matrix(cs.metric, cs.domain)
        d = cs.dim
        checks = [S.sub(S.add(*(S.mul(cs.metric[i][k], gp[k][j]) for k in range(d))),
                        S.ONE if i == j else S.ZERO) for i in range(d) for j in range(d)]
        if not S.is_zero_all(checks, cs.domain, trials=20, tol=1e-8):
            raise SingularMetric(f"metric of {cs.name} is not invertible on its domain")
        cs._cometric = gp
    return cs._cometric


# ---------------------------------------------------------------------------
# connection


def christoffel(cs: CoordSystem):
    """Γ[i][j][k] = Γ_ij^k of the Levi-Civita connection."""
    if cs._christoffel is None:
        d, x, g = cs.dim, cs.coords, cs.metric
        gp = cometric(cs)
        dg = [[[S.diff(g[i][j], x[v]) for v in range(d)] for j in range(d)] for i in range(d)]
        half = S.const_q(Fraction(1, 2))
        gam = [[[None] * d for _ in range(d)] for _ in range(d)]
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    terms = []
                    for l in range(d):
                        terms.append(S.mul(gp[l][k], dg[i][l][j]))
                        terms.append(S.mul(gp[l][k], dg[j][l][i]))
                        terms.append(S.neg(S.mul(gp[l][k], dg[j][i][l])))
                    gam[i][j][k] = S.simplify(S.mul(half, S.add(*terms)))
        cs._christoffel = gam
    return cs._christoffel


def christoffel_morphism(cs: CoordSystem) -> R.MatMorphism:
    """Γ as T⊗T ⤳ T."""
    gam, x = christoffel(cs), cs.coords
    return R.MatMorphism(Prod(cs.atom, cs.atom), cs.atom, {
        ((x[i], x[j]), x[k]): gam[i][j][k]
        for i in range(cs.dim) for j in range(cs.dim) for k in range(cs.dim)})


def affinity(cs: CoordSystem, o: Obj) -> R.MatMorphism:
    """Affinity ``T⊗o ⤳ o``, by induction on the object."""
    hit = cs._affinity.get(o)
    if hit is not None:
        return hit
    T = cs.atom
    if o == UNIT:
        out = R.zero_m(Prod(T, UNIT), UNIT)
    elif o == T:
        out = christoffel_morphism(cs)
    elif isinstance(o, Dual) and o.inner == T:
        base = affinity(cs, T)
        out = R.MatMorphism(Prod(T, o), o, {
            ((i, DualIx(j)), DualIx(k)): S.neg(v) for ((i, k), j), v in base.entries.items()})
    elif isinstance(o, Prod):
        fa, fb = affinity(cs, o.left), affinity(cs, o.right)
        acc = {}
        for ((i, j), l), v in fa.entries.items():
            for k in enumerate_indices(o.right):
                acc.setdefault(((i, (j, k)), (l, k)), []).append(v)
        for ((i, k), m), v in fb.entries.items():
            for j in enumerate_indices(o.left):
                acc.setdefault(((i, (j, k)), (j, m)), []).append(v)
        out = R.MatMorphism(Prod(T, o), o, {key: S.add(*vs) for key, vs in acc.items()})
    else:
        raise TypeMismatch(f"object {o} is not built over {cs.name}")
    cs._affinity[o] = out
    return out


def partial_derivative(cs: CoordSystem, t: R.MatMorphism) -> R.MatMorphism:
    """∂t : T⊗a ⤳ b with entry ((v, i), j) = ∂_v t(i, j)."""
    out = {}
    for (i, j), e in t.entries.items():
        for v in cs.coords:
            out[(v, i), j] = S.diff(e, v)
    return R.MatMorphism(Prod(cs.atom, t.dom), t.cod, out)


def covariant_derivative(cs: CoordSystem, t: R.MatMorphism) -> R.MatMorphism:
    """∇t = ∂t − t∘aff(dom) + aff(cod)∘(id ⊗ t)."""
    parts = [partial_derivative(cs, t)]
    if t.dom != UNIT:
        parts.append(R.scale(S.MINUS_ONE, R.compose(t, affinity(cs, t.dom), simplify=False)))
    if t.cod != UNIT:
        parts.append(R.compose(affinity(cs, t.cod), R.tensor(R.identity(cs.atom), t),
                               simplify=False))
    return R.add_many(parts)


# ---------------------------------------------------------------------------
# derivative boxes in networks


def expand_derivatives(cs: CoordSystem, n: A.Net) -> A.Net:
    """Replace every covariant box by a ∂-box plus affinity corrections.

    Boxes are expanded outside-in: the replacement sum is built around the
    unexpanded body and then expanded recursively.
    """
    parts = []
    for part in n.parts:
        if isinstance(part, A.Generator):
            parts.append(part)
        elif isinstance(part, A.SumPart):
            parts.append(A.SumPart(tuple(expand_derivatives(cs, b) for b in part.branches)))
        elif part.kind == "partial":
            parts.append(A.Box("partial", part.direction, expand_derivatives(cs, part.body)))
        else:
            parts.extend(expand_derivatives(cs, _expand_box(cs, part)).parts)
    return A.Net(tuple(parts), n.edges)


def _expand_box(cs: CoordSystem, box: A.Box) -> A.Net:
    d, body = box.direction, box.body
    free = body.free_ports()
    branches = [A.partial_box(d, body)]
    for p in free:
        if p.obj == UNIT:
            continue
        aff = affinity(cs, p.obj)
        q = A.fresh_port(p.obj, p.label)
        r = A.fresh_port(dual(p.obj), p.label)
        copy = A.clone(body, mapping={p: q}, keep=[x for x in free if x != p])
        gen = A.Net((A.Generator("Γ", A.to_form(aff), (d, p, r), {"glyph": "box"}),), ((r, q),))
        branches.append(A.multiply(A.constant(S.MINUS_ONE), gen, copy))
    return branches[0] if len(branches) == 1 else A.plus(branches)


# ---------------------------------------------------------------------------
# curvature


def curvature(cs: CoordSystem):
    """R[l][i][j][k] = R^l_ijk."""
    if cs._curvature is None:
        d, x = cs.dim, cs.coords
        gam = christoffel(cs)
        dgam = [[[[S.diff(gam[j][k][l], x[i]) for l in range(d)] for k in range(d)]
                 for j in range(d)] for i in range(d)]
        out = [[[[None] * d for _ in range(d)] for _ in range(d)] for _ in range(d)]
        for l in range(d):
            for i in range(d):
                for j in range(d):
                    for k in range(d):
                        terms = [dgam[i][j][k][l], S.neg(dgam[j][i][k][l])]
                        for m in range(d):
                            terms.append(S.mul(gam[i][m][l], gam[j][k][m]))
                            terms.append(S.neg(S.mul(gam[j][m][l], gam[i][k][m])))
                        out[l][i][j][k] = S.simplify(S.add(*terms))
        cs._curvature = out
    return cs._curvature


def ricci(cs: CoordSystem):
    """Ricci[j][k] = Σ_i R^i_ijk (the contraction of the upper index with the
    first lower one; symmetric for the Levi-Civita connection)."""
    d = cs.dim
    riem = curvature(cs)
    return [[S.simplify(S.add(*(riem[i][i][j][k] for i in range(d)))) for k in range(d)]
            for j in range(d)]


def gaussian(cs: CoordSystem) -> S.Expr:
    """½ g′^jk Ricci_jk."""
    d = cs.dim
    gp, ric = cometric(cs), ricci(cs)
    half = S.const_q(Fraction(1, 2))
    return S.simplify(S.mul(half, S.add(*(S.mul(gp[j][k], ric[j][k])
                                          for j in range(d) for k in range(d)))))


def gr_lhs(cs: CoordSystem):
    """Ricci_ij + gaussian · g_ij."""
    ric, s = ricci(cs), gaussian(cs)
    return [[S.simplify(S.add(ric[i][j], S.mul(s, cs.metric[i][j]))) for j in range(cs.dim)]
            for i in range(cs.dim)]


def vector_morphism(cs: CoordSystem, u) -> R.MatMorphism:
    """A vector field u^k as 1 ⤳ T."""
    if len(u) != cs.dim:
        raise TypeMismatch(f"vector needs {cs.dim} components")
    return R.MatMorphism(UNIT, cs.atom, {((), c): S.as_expr(x) for c, x in zip(cs.coords, u)})


def ricci_identity_sides(cs: CoordSystem, u):
    """(lhs, rhs) as d×d×d arrays indexed [i][j][k] for
    ∇_i∇_j u^k − ∇_j∇_i u^k and R^k_ijl u^l."""
    d, x = cs.dim, cs.coords
    u = [S.as_expr(e) for e in u]
    nn = covariant_derivative(cs, covariant_derivative(cs, vector_morphism(cs, u)))
    riem = curvature(cs)
    lhs = [[[S.sub(nn[(x[i], (x[j], ())), x[k]], nn[(x[j], (x[i], ())), x[k]])
             for k in range(d)] for j in range(d)] for i in range(d)]
    rhs = [[[S.add(*(S.mul(riem[k][i][j][l], u[l]) for l in range(d)))
             for k in range(d)] for j in range(d)] for i in range(d)]
    return lhs, rhs


def verify_ricci_identity(cs: CoordSystem, u, trials=50, tol=1e-7, seed=0) -> bool:
    lhs, rhs = ricci_identity_sides(cs, u)
    d = cs.dim
    diffs = [S.sub(lhs[i][j][k], rhs[i][j][k]) for i in range(d) for j in range(d) for k in range(d)]
    return S.is_zero_all(diffs, cs.domain, trials, tol, seed)


# ---------------------------------------------------------------------------
# change of coordinates


@dataclass(frozen=True)
class Jacobian:
    """``matrix[i][j]`` = ∂q_j/∂x_i maps source covector components to target ones."""

    source: CoordSystem
    target: CoordSystem
    matrix: list
    inverse: list


def jacobian_polar_to_cartesian() -> Jacobian:
    src, dst = polar(), euclidean(("x", "y"))
    rho, theta = S.var("rho"), S.var("theta")
    # x = rho cos(theta), y = rho sin(theta); rows of dxdq: x, y
    xs = [S.mul(rho, S.cos_e(theta)), S.mul(rho, S.sin_e(theta))]
    dxdq = [[S.diff(xi, q) for q in src.coords] for xi in xs]
    dqdx = inverse_matrix(dxdq, src.domain)  # rows rho, theta
    mat = [[dqdx[j][i] for j in range(2)] for i in range(2)]
    inv = inverse_matrix(mat, src.domain)
    return Jacobian(src, dst, mat, inv)


def transform_covector(jac: Jacobian, v):
    """{v_target}_i = J_i^j {v_source}_j."""
    if len(v) != len(jac.matrix[0]):
        raise TypeMismatch(f"covector needs {len(jac.matrix[0])} components")
    return [S.simplify(S.add(*(S.mul(row[j], S.as_expr(v[j])) for j in range(len(v)))))
            for row in jac.matrix]


def jacobian_morphism(jac: Jacobian, o: Obj) -> R.MatMorphism:
    """Coefficient map from target-chart to source-chart objects of shape ``o``.

    Built factorwise (J(V⊗W) = J(V)⊗J(W), duals through the inverse), so
    ``t_target = t_source ∘ jacobian_morphism(jac, dom t)`` for ``t : a ⤳ 1``.
    """
    st, tt = jac.source.atom, jac.target.atom
    sc, tc = jac.source.coords, jac.target.coords
    n = len(sc)
    if o == UNIT:
        return R.identity(UNIT)
    if o == st:
        return R.MatMorphism(tt, st, {(tc[i], sc[j]): jac.matrix[i][j]
                                      for i in range(n) for j in range(n)})
    if o == dual(st):
        return R.MatMorphism(dual(tt), dual(st), {(DualIx(tc[i]), DualIx(sc[j])): jac.inverse[j][i]
                                                  for i in range(n) for j in range(n)})
    if isinstance(o, Prod):
        return R.tensor(jacobian_morphism(jac, o.left), jacobian_morphism(jac, o.right))
    raise TypeMismatch(f"object {o} is not over {jac.source.name}")


def transform_form(jac: Jacobian, t: R.MatMorphism) -> R.MatMorphism:
    """Re-express ``t : a ⤳ 1`` over the source chart in the target chart."""
    if t.cod != UNIT:
        raise TypeMismatch("transform_form expects a morphism into the unit")
    return R.compose(t, jacobian_morphism(jac, t.dom)).simplified()
