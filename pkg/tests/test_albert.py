import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles as O
from generators import random_form, random_net
from tensorcat import albert as A
from tensorcat import geometry as G
from tensorcat import laws as L
from tensorcat import roger as R
from tensorcat import scalar as S
from tensorcat.errors import (PortNotFree, PortReused, PortUnused, SignatureMismatch,
                              TypeMismatch)
from tensorcat.objects import UNIT, Atom, Prod, dual

SP = L.space(3)
T = Atom(SP)
NAMES = list(SP.coords)
DOM = L.sampling_domain(SP)
ENV = {"x0": 0.3, "x1": -0.8, "x2": 1.1}


def mat(rng, a, b):
    return L.random_morphism(rng, a, b, NAMES, density=1.0, depth=1)


def test_fresh_ports():
    p, q = A.fresh_port(T), A.fresh_port(T)
    assert p != q and p.obj == T
    assert A.fresh_port(UNIT).obj == UNIT


def test_embed_metric_and_constant():
    cs = G.polar()
    i, j = A.fresh_port(cs.atom, "i"), A.fresh_port(cs.atom, "j")
    n = A.embed(cs.metric_morphism(), [i, j], "g")
    assert A.check_linear(n) == [i, j]
    got = A.eval_einsum(n, [i, j])
    assert R.equal_num(got, cs.metric_morphism(), cs.domain)
    c = A.eval_einsum(A.constant(S.var("x0")), [])
    assert c.entries == {((), ()): S.var("x0")}
    with pytest.raises(TypeMismatch):
        A.embed(cs.metric_morphism(), [i, A.fresh_port(dual(cs.atom))])


def test_delta_substitution_and_trace():
    rng = np.random.default_rng(0)
    t = mat(rng, T, T)
    i, k_hi, k_lo, j = A.fresh_port(T), A.fresh_port(dual(T)), A.fresh_port(T), A.fresh_port(dual(T))
    # δ_i^k t_k^j = t_i^j
    n = A.contract(A.multiply(A.delta(i, k_hi), A.embed(t, [k_lo, j])), k_hi, k_lo)
    assert R.equal_num(A.eval_einsum(n, [i, j]), A.to_form(t), DOM)
    for d, sp in ((2, G.polar()), (4, G.schwarzschild())):
        a, b = A.fresh_port(sp.atom), A.fresh_port(dual(sp.atom))
        tr = A.eval_einsum(A.contract(A.delta(a, b), b, a), [])
        assert tr.entries == {((), ()): S.const_q(d)}
    u, v = A.fresh_port(UNIT), A.fresh_port(UNIT)
    assert A.eval_einsum(A.delta(u, v), [u, v]).entries[(((), ()), ())] == S.ONE


def test_multiply_and_contract():
    rng = np.random.default_rng(1)
    t, u = mat(rng, T, T), mat(rng, T, T)
    i, kh, kl, j = A.fresh_port(T), A.fresh_port(dual(T)), A.fresh_port(T), A.fresh_port(dual(T))
    n = A.contract(A.multiply(A.embed(t, [i, kh]), A.embed(u, [kl, j])), kh, kl)
    assert n.order == 2
    got = A.eval_einsum(n, [i, j])
    want = A.to_form(R.compose(u, t))
    assert R.equal_num(got, want, DOM)
    # value of the extracted term matches too
    assert R.equal_num(R.eval_term(A.to_morphism(n, [i, j])), want, DOM)
    with pytest.raises(PortReused):
        A.multiply(A.embed(t, [i, kh]), A.embed(u, [i, j]))
    with pytest.raises(TypeMismatch):
        A.contract(n.__class__(), i, A.fresh_port(T))
    with pytest.raises(PortNotFree):
        A.contract(n, kh, kl)


def test_mixed_order_product():
    x, y = A.fresh_port(dual(T)), A.fresh_port(T)
    rng = np.random.default_rng(2)
    n = A.multiply(A.embed(random_form(rng, [dual(T)], NAMES), [x]),
                   A.embed(random_form(rng, [T], NAMES), [y]))
    assert n.order == 2
    m = A.multiply(n, A.constant(1))
    assert R.equal_num(A.eval_einsum(m, [x, y]), A.eval_einsum(n, [x, y]), DOM)


def test_plus_and_zero():
    rng = np.random.default_rng(3)
    i, j = A.fresh_port(T), A.fresh_port(dual(T))
    a = A.embed(random_form(rng, [T, dual(T)], NAMES), [i, j])
    b = A.clone(a, keep=[i, j])
    s = A.plus([a, b])
    assert R.equal_num(A.eval_einsum(s, [i, j]), R.scale(2, A.eval_einsum(a, [i, j])), DOM)
    z = A.plus([a, A.zero_tensor([i, j])])
    assert R.equal_num(A.eval_einsum(z, [i, j]), A.eval_einsum(a, [i, j]), DOM)
    with pytest.raises(SignatureMismatch):
        A.plus([a, A.embed(random_form(rng, [T], NAMES), [A.fresh_port(T)])])


def test_zero_tensor_annihilates():
    ps = [A.fresh_port(T), A.fresh_port(T), A.fresh_port(dual(T))]
    z = A.zero_tensor(ps)
    assert A.eval_einsum(z, ps).entries == {}
    rng = np.random.default_rng(4)
    q = A.fresh_port(T)
    prod = A.multiply(z, A.embed(random_form(rng, [T], NAMES), [q]))
    assert A.eval_einsum(prod, ps + [q]).entries == {}


def test_distributivity_over_sums():
    rng = np.random.default_rng(5)
    i, j, k = A.fresh_port(T), A.fresh_port(dual(T)), A.fresh_port(T)
    a = A.embed(random_form(rng, [T, dual(T)], NAMES), [i, j])
    b = A.embed(random_form(rng, [T, dual(T)], NAMES), [i, j])
    c = A.embed(random_form(rng, [T], NAMES), [k])
    lhs = A.multiply(A.plus([a, b]), c)
    rhs = A.plus([A.multiply(a, A.clone(c, keep=[k])), A.multiply(A.clone(b, keep=[i, j]), A.clone(c, keep=[k]))])
    assert R.equal_num(A.eval_einsum(lhs, [i, j, k]), A.eval_einsum(rhs, [i, j, k]), DOM)


def test_raise_lower():
    cs = G.polar()
    rng = np.random.default_rng(6)
    T = cs.atom
    i, p0, p1, x = A.fresh_port(T), A.fresh_port(T), A.fresh_port(dual(T)), A.fresh_port(T)
    # t(i, lower ^p1) with p1 plugged into raise(p0): the value of t(i, p0) comes back
    frag1, slot = A.lower(p1, cs)
    frag0, q0 = A.raise_(p0, cs)
    form = L.random_morphism(rng, Prod(T, T), UNIT, list(cs.coords), density=1.0)
    n = A.multiply(A.embed(form, [i, slot]), frag1, frag0, A.delta(x, q0))
    n = A.contract(n, p1, x)
    assert R.equal_num(A.eval_einsum(n, [i, p0]), form, cs.domain)
    with pytest.raises(TypeMismatch):
        A.raise_(A.fresh_port(dual(T)), cs)
    with pytest.raises(TypeMismatch):
        A.lower(A.fresh_port(T), cs)


def test_raise_with_delta_metric_only_changes_variance():
    eu = G.euclidean()
    p, x = A.fresh_port(eu.atom), A.fresh_port(eu.atom)
    frag, q = A.raise_(p, eu)
    assert q.obj == dual(eu.atom)
    got = A.eval_einsum(A.multiply(frag, A.delta(x, q)), [p, x])
    assert got.entries == {(("x", "x"), ()): S.ONE, (("y", "y"), ()): S.ONE}


def test_derivative_boxes():
    cs = G.polar()
    rho = S.var("rho")
    i, j = A.fresh_port(cs.atom), A.fresh_port(cs.atom)
    grad = A.eval_einsum(G.expand_derivatives(cs, A.deriv_box(i, A.constant(S.neg(S.log_e(rho))))), [i])
    assert S.is_zero(S.add(grad["rho", ()], S.recip(rho)), cs.domain)
    assert grad["theta", ()] == S.ZERO
    box = A.partial_box(j, A.constant(S.const_q(5)))
    assert A.eval_einsum(box, [j]).entries == {}
    with pytest.raises(TypeMismatch):
        A.deriv_box(A.fresh_port(dual(cs.atom)), A.constant(1))
    nested = A.deriv_box(j, A.deriv_box(i, A.constant(rho)))
    assert A.has_boxes(nested) and not A.has_boxes(G.expand_derivatives(cs, nested), "covariant")


def test_check_linear_errors():
    rng = np.random.default_rng(7)
    p, q = A.fresh_port(T), A.fresh_port(dual(T))
    g1 = A.embed(random_form(rng, [T], NAMES), [p]).parts[0]
    g2 = A.embed(random_form(rng, [T], NAMES), [p]).parts[0]
    with pytest.raises(PortReused):
        A.check_linear(A.Net((g1, g2)))
    dangling = A.Net((g1,), ((q, A.fresh_port(T)),))
    with pytest.raises(PortUnused):
        A.check_linear(dangling)
    branch_a = A.embed(random_form(rng, [T], NAMES), [A.fresh_port(T)])
    branch_b = A.embed(random_form(rng, [T], NAMES), [A.fresh_port(T)])
    with pytest.raises(SignatureMismatch):
        A.check_linear(A.Net((A.SumPart((branch_a, branch_b)),)))
    for bad in (A.Net((g1, g2)), dangling):
        with pytest.raises((PortReused, PortUnused)):
            A.eval_einsum(bad)
        with pytest.raises((PortReused, PortUnused)):
            A.to_morphism(bad)


def test_to_morphism_single_prim_and_swap():
    rng = np.random.default_rng(8)
    i, j = A.fresh_port(T), A.fresh_port(dual(T))
    n = A.embed(random_form(rng, [T, dual(T)], NAMES), [i, j])
    assert R.equal_num(R.eval_term(A.to_morphism(n, [i, j])), A.eval_einsum(n, [i, j]), DOM)
    swapped = R.eval_term(A.to_morphism(n, [j, i]))
    assert R.equal_num(swapped, A.eval_einsum(n, [j, i]), DOM)
    assert R.equal_num(R.compose(A.eval_einsum(n, [i, j]), R.sigma(dual(T), T)), swapped, DOM)


def test_einsum_of_empty_product():
    assert A.eval_einsum(A.constant(1), []).entries == {((), ()): S.ONE}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_einsum_matches_numpy_oracle(seed):
    rng = np.random.default_rng(seed)
    net, sp = random_net(rng, max_nodes=4, max_dim=3)
    order = list(net.free_ports())
    rng.shuffle(order)
    env = {c: float(v) for c, v in zip(sp.coords, rng.uniform(-1, 1, sp.dim))}
    got = O.dense(A.eval_einsum(net, order), env).reshape(-1)
    want = O.net_array(net, order, env).reshape(-1)
    assert np.allclose(got, want)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_contraction_order_invariance(seed):
    rng = np.random.default_rng(seed)
    net, sp = random_net(rng, max_nodes=4, max_dim=2)
    edges = list(net.edges)
    rng.shuffle(edges)
    shuffled = A.Net(net.parts, tuple(edges))
    order = net.free_ports()
    dom = L.sampling_domain(sp)
    assert R.equal_num(A.eval_einsum(net, order), A.eval_einsum(shuffled, order), dom, trials=5)
