import math

import numpy as np
import pytest

import oracles as O
from generators import random_form
from tensorcat import albert as A
from tensorcat import geometry as G
from tensorcat import roger as R
from tensorcat import scalar as S
from tensorcat.errors import SingularMetric, TypeMismatch
from tensorcat.objects import UNIT, DualIx, Prod, dual

rho, theta = S.var("rho"), S.var("theta")
POL = G.polar()
SW = G.schwarzschild()
EU = G.euclidean()


def zero(exprs, cs, tol=1e-9):
    return S.is_zero_all(list(exprs), cs.domain, trials=30, tol=tol)


def flat(a):
    if isinstance(a, list):
        return [x for y in a for x in flat(y)]
    return [a]


def test_polar_chart():
    assert POL.coords == ("rho", "theta")
    assert zero([S.sub(POL.metric[1][1], S.int_pow(rho, 2)), S.sub(POL.metric[0][0], S.ONE)], POL)


def test_polar_christoffel_matches_closed_form():
    gam = G.christoffel(POL)
    for r, t in ((0.5, 0.3), (2.0, 1.1), (7.5, 2.9)):
        got = np.array([[[S.eval_num(gam[i][j][k], {"rho": r, "theta": t}) for k in range(2)]
                         for j in range(2)] for i in range(2)])
        assert np.allclose(got, O.polar_christoffel(r, t), atol=1e-12)


def test_schwarzschild_metric():
    g = SW.metric
    for i in range(4):
        for j in range(4):
            if i != j:
                assert g[i][j] == S.ZERO
    env = {"t": 0.0, "rho": 3.0, "theta": 0.7, "phi": 1.0, "r_s": 1.0, "c": 1.0}
    dense = np.array([[S.eval_num(e, env) for e in row] for row in g])
    assert np.allclose(dense, O.schwarzschild_metric(0.0, 3.0, 0.7, 1.0))


@pytest.mark.parametrize("cs", [POL, SW, EU], ids=lambda c: c.name)
def test_cometric_inverts_metric(cs):
    gp, g, d = G.cometric(cs), cs.metric, cs.dim
    checks = [S.sub(S.add(*(S.mul(g[i][k], gp[k][j]) for k in range(d))), S.ONE if i == j else S.ZERO)
              for i in range(d) for j in range(d)]
    assert zero(checks, cs, 1e-8)


def test_cometric_values():
    gp = G.cometric(POL)
    assert zero([S.sub(gp[1][1], S.int_pow(rho, -2)), gp[0][1], gp[1][0], S.sub(gp[0][0], S.ONE)], POL)
    gp = G.cometric(SW)
    f = S.sub(S.ONE, S.div(S.var("r_s"), rho))
    want = [S.neg(S.mul(S.recip(f), S.int_pow(S.var("c"), -2))), f, S.int_pow(rho, -2),
            S.int_pow(S.mul(rho, S.sin_e(theta)), -2)]
    assert zero([S.sub(gp[k][k], w) for k, w in enumerate(want)], SW)
    assert G.cometric(EU) == [[S.ONE, S.ZERO], [S.ZERO, S.ONE]]


def test_singular_metric_is_rejected():
    cs = G.CoordSystem("bad", ("x", "y"), [[S.ONE, S.ONE], [S.ONE, S.ONE]],
                       S.Domain({"x": (0.0, 1.0), "y": (0.0, 1.0)}))
    with pytest.raises(SingularMetric):
        G.cometric(cs)


def test_asymmetric_metric_is_rejected():
    with pytest.raises(TypeMismatch):
        G.CoordSystem("bad", ("x", "y"), [[S.ONE, S.var("x")], [S.ZERO, S.ONE]],
                      S.Domain({"x": (0.5, 1.0), "y": (0.0, 1.0)}))


def test_christoffel_flat_and_symmetric():
    assert all(e == S.ZERO for e in flat(G.christoffel(EU)))
    gam, d = G.christoffel(SW), SW.dim
    assert zero([S.sub(gam[i][j][k], gam[j][i][k]) for i in range(d) for j in range(d) for k in range(d)],
                SW, 1e-8)


def test_affinity_cases():
    T = POL.atom
    assert G.affinity(POL, UNIT).entries == {}
    gam = G.christoffel_morphism(POL)
    assert R.equal_num(G.affinity(POL, T), gam, POL.domain)
    dual_aff = G.affinity(POL, dual(T))
    for ((i, k), j), v in gam.entries.items():
        assert S.is_zero(S.add(dual_aff[(i, DualIx(j)), DualIx(k)], v), POL.domain)


def test_affinity_of_product_acts_factorwise():
    # on T⊗T, aff = Γ⊗id + id⊗Γ rearranged: check one entry per term
    T = POL.atom
    aff = G.affinity(POL, Prod(T, T))
    g = G.christoffel(POL)
    want = g[1][1][0]  # ((θ,(θ,ρ)),(ρ,ρ)) picks Γ_θθ^ρ from the left factor
    assert S.is_zero(S.sub(aff[("theta", ("theta", "rho")), ("rho", "rho")], want), POL.domain)


def test_partial_derivative():
    T = POL.atom
    assert G.partial_derivative(POL, R.identity(T)).entries == {}
    dg = G.partial_derivative(POL, POL.metric_morphism())
    assert S.is_zero(S.sub(dg[("rho", ("theta", "theta")), ()], S.mul(S.const_q(2), rho)), POL.domain)
    p = R.MatMorphism(UNIT, UNIT, {((), ()): S.neg(S.log_e(rho))})
    dp = G.partial_derivative(POL, p)
    assert S.is_zero(S.add(dp[("rho", ()), ()], S.recip(rho)), POL.domain)
    assert dp[("theta", ()), ()] == S.ZERO


def test_covariant_derivative_of_scalar_and_hessian():
    p = R.MatMorphism(UNIT, UNIT, {((), ()): S.neg(S.log_e(rho))})
    assert R.equal_num(G.covariant_derivative(POL, p), G.partial_derivative(POL, p), POL.domain)
    # ∇P as a form T ⤳ 1, then differentiate again
    form = R.MatMorphism(POL.atom, UNIT, {(v, ()): e for ((v, _), _), e in
                                          G.covariant_derivative(POL, p).entries.items()})
    hess = G.covariant_derivative(POL, form)
    want = {("rho", "rho"): S.int_pow(rho, -2), ("theta", "theta"): S.MINUS_ONE,
            ("rho", "theta"): S.ZERO, ("theta", "rho"): S.ZERO}
    assert zero([S.sub(hess[k, ()], v) for k, v in want.items()], POL)


@pytest.mark.parametrize("cs", [POL, SW], ids=lambda c: c.name)
def test_metric_compatibility(cs):
    assert zero(G.covariant_derivative(cs, cs.metric_morphism()).entries.values(), cs, 1e-8)
    assert zero(G.covariant_derivative(cs, cs.cometric_morphism()).entries.values(), cs, 1e-8)


def test_expand_derivatives_value_preserving():
    rng = np.random.default_rng(0)
    T = POL.atom
    for objs in ([T], [dual(T)], [T, dual(T)]):
        ports = [A.fresh_port(o) for o in objs]
        body = A.embed(random_form(rng, objs, list(POL.coords)), ports)
        v = A.fresh_port(T)
        got = A.eval_einsum(G.expand_derivatives(POL, A.deriv_box(v, body)), [v, *ports])
        want = G.covariant_derivative(POL, A.eval_einsum(body, ports))
        if len(objs) == 2:
            want = R.compose(want, R.alpha(T, T, dual(T)))
        assert R.equal_num(got, want, POL.domain, tol=1e-8)


def test_nested_boxes_match_divergence_formula():
    # g'^{ij} ∇_i ∇_j P = g'^{ij} ∂_i ∂_j P − g'^{kl} Γ_kl^m ∂_m P
    P = S.mul(rho, S.cos_e(theta))
    i, j = A.fresh_port(POL.atom), A.fresh_port(POL.atom)
    hess = A.eval_einsum(G.expand_derivatives(POL, A.deriv_box(j, A.deriv_box(i, A.constant(P)))), [j, i])
    gp, gam, x = G.cometric(POL), G.christoffel(POL), POL.coords
    lhs = S.add(*(S.mul(gp[a][b], hess[(x[a], x[b]), ()]) for a in range(2) for b in range(2)))
    rhs = S.sub(S.add(*(S.mul(gp[a][b], S.diff(S.diff(P, x[b]), x[a])) for a in range(2) for b in range(2))),
                S.add(*(S.mul(gp[k][l], S.mul(gam[k][l][m], S.diff(P, x[m])))
                        for k in range(2) for l in range(2) for m in range(2))))
    assert S.is_zero(S.sub(lhs, rhs), POL.domain)


def test_curvature_polar_flat_and_antisymmetric():
    assert zero(flat(G.curvature(POL)), POL)
    assert zero(flat(G.ricci(POL)), POL)
    assert S.is_zero(G.gaussian(POL), POL.domain)
    assert all(e == S.ZERO for e in flat(G.curvature(EU)))
    assert zero(flat(G.gr_lhs(EU)), EU)
    r, d = G.curvature(SW), SW.dim
    assert zero([S.add(r[l][i][j][k], r[l][j][i][k])
                 for l in range(d) for i in range(d) for j in range(d) for k in range(d)], SW, 1e-8)


def test_sphere_is_curved():
    # the 2-sphere of radius 1: Gaussian-style scalar is nonzero, Ricci = metric
    th = S.var("th")
    sph = G.CoordSystem("sphere", ("th", "ph"), [[S.ONE, S.ZERO], [S.ZERO, S.int_pow(S.sin_e(th), 2)]],
                        S.Domain({"th": (0.2, 2.9), "ph": (0.0, 6.0)}))
    ric = G.ricci(sph)
    assert zero([S.sub(ric[a][b], sph.metric[a][b]) for a in range(2) for b in range(2)], sph, 1e-8)
    assert not S.is_zero(G.gaussian(sph), sph.domain)


def test_ricci_identity():
    assert G.verify_ricci_identity(POL, [rho, S.sin_e(theta)])
    assert G.verify_ricci_identity(POL, [S.ZERO, S.ZERO])
    assert G.verify_ricci_identity(SW, [S.ZERO, rho, S.ZERO, S.ZERO])
    with pytest.raises(TypeMismatch):
        G.verify_ricci_identity(POL, [rho])


def test_jacobian():
    jac = G.jacobian_polar_to_cartesian()
    m, inv = jac.matrix, jac.inverse
    assert zero([S.sub(S.add(*(S.mul(m[i][k], inv[k][j]) for k in range(2))), S.ONE if i == j else S.ZERO)
                 for i in range(2) for j in range(2)], jac.source)
    v = [S.neg(S.recip(rho)), S.ZERO]
    out = G.transform_covector(jac, v)
    env = {"rho": 2.0, "theta": 0.4}
    assert S.eval_num(out[0], env) == pytest.approx(-math.cos(0.4) / 2)
    assert S.eval_num(out[1], env) == pytest.approx(-math.sin(0.4) / 2)
    with pytest.raises(TypeMismatch):
        G.transform_covector(jac, [rho])


def test_transform_form_agrees_with_covector_rule():
    jac = G.jacobian_polar_to_cartesian()
    T = jac.source.atom
    v = [S.mul(rho, S.sin_e(theta)), S.cos_e(theta)]
    form = R.MatMorphism(T, UNIT, {(c, ()): e for c, e in zip(jac.source.coords, v)})
    out = G.transform_form(jac, form)
    direct = G.transform_covector(jac, v)
    assert zero([S.sub(out[c, ()], e) for c, e in zip(jac.target.coords, direct)], jac.source)
    # J(V⊗W) = J(V)⊗J(W): the metric's cartesian components are δ
    g = G.transform_form(jac, jac.source.metric_morphism())
    want = {("x", "x"): S.ONE, ("y", "y"): S.ONE, ("x", "y"): S.ZERO, ("y", "x"): S.ZERO}
    assert zero([S.sub(g[k, ()], w) for k, w in want.items()], jac.source)
