"""Objects of the tensor category and their basis indices.

An object is the unit ``1``, the atomic space ``T`` of a coordinate
system, a dual ``a*`` or a binary product ``a⊗b``.  Duals are normalized
eagerly (``a** = a``, ``1* = 1``, ``(a⊗b)* = a*⊗b*``) so a dual wrapper only
ever sits directly on an atom.

Basis indices mirror the object shape: ``()`` for the unit, a coordinate
name for the atom, :class:`DualIx` for the dual atom and a 2-tuple for a
product.
"""

from dataclasses import dataclass
from itertools import product as _cartesian


@dataclass(frozen=True)
class Space:
    """The atomic space of a coordinate system: its name and coordinate names."""

    name: str
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if not self.coords:
            raise ValueError("a space needs at least one coordinate")
        if len(set(self.coords)) != len(self.coords):
            raise ValueError(f"duplicate coordinate names in {self.coords}")

    @property
    def dim(self):
        return len(self.coords)


class Obj:
    __slots__ = ()

    def __mul__(self, other):
        return Prod(self, other)

    @property
    def star(self):
        return dual(self)


@dataclass(frozen=True)
class Unit(Obj):
    def __str__(self):
        return "1"


@dataclass(frozen=True)
class Atom(Obj):
    space: Space

    def __str__(self):
        return "T"


@dataclass(frozen=True)
class Dual(Obj):
    """Dual of an atom.  Build through :func:`dual`, which normalizes."""

    inner: Atom

    def __post_init__(self):
        if not isinstance(self.inner, Atom):
            raise TypeError("Dual wraps atoms only; use dual() to normalize")

    def __str__(self):
        return "T*"


@dataclass(frozen=True)
class Prod(Obj):
    left: Obj
    right: Obj

    def __str__(self):
        return f"({self.left}⊗{self.right})"


UNIT = Unit()


@dataclass(frozen=True)
class DualIx:
    """Index of a dual basis vector; wraps the coordinate name."""

    name: str

    def __hash__(self):
        return hash(self.name) ^ 0x5F3759DF

    def __str__(self):
        return f"{self.name}*"


def dual(o: Obj) -> Obj:
    if isinstance(o, Unit):
        return o
    if isinstance(o, Atom):
        return Dual(o)
    if isinstance(o, Dual):
        return o.inner
    if isinstance(o, Prod):
        return Prod(dual(o.left), dual(o.right))
    raise TypeError(f"not an object: {o!r}")


def dim(o: Obj) -> int:
    if isinstance(o, Unit):
        return 1
    if isinstance(o, Atom):
        return o.space.dim
    if isinstance(o, Dual):
        return o.inner.space.dim
    return dim(o.left) * dim(o.right)


def enumerate_indices(o: Obj) -> list:
    """Basis indices of ``o``: declaration order for atoms, left-major for products."""
    if isinstance(o, Unit):
        return [()]
    if isinstance(o, Atom):
        return list(o.space.coords)
    if isinstance(o, Dual):
        return [DualIx(c) for c in o.inner.space.coords]
    return list(_cartesian(enumerate_indices(o.left), enumerate_indices(o.right)))


def ix_dual(ix):
    """The index of ``dual(o)`` corresponding to index ``ix`` of ``o``."""
    if ix == ():
        return ()
    if isinstance(ix, str):
        return DualIx(ix)
    if isinstance(ix, DualIx):
        return ix.name
    return (ix_dual(ix[0]), ix_dual(ix[1]))


def is_index_of(ix, o: Obj) -> bool:
    if isinstance(o, Unit):
        return ix == ()
    if isinstance(o, Atom):
        return isinstance(ix, str) and ix in o.space.coords
    if isinstance(o, Dual):
        return isinstance(ix, DualIx) and ix.name in o.inner.space.coords
    return (isinstance(ix, tuple) and len(ix) == 2
            and is_index_of(ix[0], o.left) and is_index_of(ix[1], o.right))


def spaces_of(o: Obj) -> set:
    if isinstance(o, Unit):
        return set()
    if isinstance(o, Atom):
        return {o.space}
    if isinstance(o, Dual):
        return {o.inner.space}
    return spaces_of(o.left) | spaces_of(o.right)


def lnest(objs) -> Obj:
    """Left-nested product ``((o1⊗o2)⊗o3)…``; the unit for an empty list."""
    objs = list(objs)
    if not objs:
        return UNIT
    acc = objs[0]
    for o in objs[1:]:
        acc = Prod(acc, o)
    return acc


def lnest_ix(ixs):
    ixs = list(ixs)
    if not ixs:
        return ()
    acc = ixs[0]
    for ix in ixs[1:]:
        acc = (acc, ix)
    return acc


def split_lnest_ix(ix, n: int) -> list:
    """Inverse of :func:`lnest_ix` for a known factor count ``n``."""
    if n == 0:
        return []
    out = []
    for _ in range(n - 1):
        ix, last = ix
        out.append(last)
    out.append(ix)
    out.reverse()
    return out


def show_ix(ix) -> str:
    if ix == ():
        return "()"
    if isinstance(ix, (str, DualIx)):
        return str(ix)
    return f"({show_ix(ix[0])},{show_ix(ix[1])})"


def parse_obj(text: str, space: Space) -> Obj:
    """Parse ``1``, ``T``, ``T*`` and ``(a⊗b)`` / ``(a x b)``."""
    s = text.replace("⊗", " x ").replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def one():
        nonlocal pos
        if pos >= len(s):
            raise ValueError(f"truncated object syntax: {text!r}")
        tok = s[pos]
        pos += 1
        if tok == "1":
            return UNIT
        if tok == "T":
            return Atom(space)
        if tok == "T*":
            return dual(Atom(space))
        if tok == "(":
            left = one()
            if pos >= len(s) or s[pos] != "x":
                raise ValueError(f"expected ⊗ in {text!r}")
            pos += 1
            right = one()
            if pos >= len(s) or s[pos] != ")":
                raise ValueError(f"expected ) in {text!r}")
            pos += 1
            return Prod(left, right)
        raise ValueError(f"unexpected {tok!r} in object syntax {text!r}")

    o = one()
    if pos != len(s):
        raise ValueError(f"trailing input in object syntax {text!r}")
    return o
