import itertools

import pytest

from tensorcat.objects import (UNIT, Atom, Dual, DualIx, Prod, Space, dim, dual,
                               enumerate_indices, parse_obj)

POLAR = Space("polar", ("rho", "theta"))
SPH = Space("spherical", ("t", "rho", "theta", "phi"))
P, H = Atom(POLAR), Atom(SPH)


def test_dim_examples():
    assert dim(UNIT) == 1
    assert dim(P) == 2
    assert dim(Prod(H, dual(H))) == 16


def test_enumerate_examples():
    assert enumerate_indices(UNIT) == [()]
    assert enumerate_indices(P) == ["rho", "theta"]
    assert enumerate_indices(Prod(P, P)) == [("rho", "rho"), ("rho", "theta"),
                                             ("theta", "rho"), ("theta", "theta")]
    assert enumerate_indices(dual(P)) == [DualIx("rho"), DualIx("theta")]


def test_dual_normalization():
    assert dual(P) == Dual(P)
    assert dual(dual(P)) == P
    assert dual(UNIT) == UNIT
    assert dual(Prod(P, dual(P))) == Prod(dual(P), P)


def _objs(depth):
    if depth == 0:
        yield from (UNIT, P, dual(P), H)
        return
    smaller = list(_objs(depth - 1))
    yield from smaller
    for a, b in itertools.islice(itertools.product(smaller, smaller), 60):
        yield Prod(a, b)


@pytest.mark.parametrize("o", list(_objs(2))[:80], ids=str)
def test_enumeration_length_and_involution(o):
    assert len(enumerate_indices(o)) == dim(o)
    assert dual(dual(o)) == o
    assert enumerate_indices(o) == enumerate_indices(o)


def test_space_validation():
    with pytest.raises(ValueError):
        Space("empty", ())
    with pytest.raises(ValueError):
        Space("dup", ("x", "x"))


def test_parse_obj():
    assert parse_obj("1", POLAR) == UNIT
    assert parse_obj("T*", POLAR) == dual(P)
    assert parse_obj("(T ⊗ (T* x 1))", POLAR) == Prod(P, Prod(dual(P), UNIT))
    with pytest.raises(ValueError):
        parse_obj("(T T)", POLAR)
