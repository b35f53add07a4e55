"""Finite groups and the vector spaces F_p^n.

Elements of every group are integer indices ``0 .. order-1``.  Structured
abelian groups (cyclic, F_p^n and products of these) are written additively
and stored as a tuple of cyclic moduli; an element's index is its mixed-radix
encoding with the first factor most significant, so for F_p^n index order is
lexicographic order of coordinate vectors.  Explicit groups carry a
multiplication table.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DomainError, PreconditionError, check_budget

MAX_TABLE_ORDER = 4096


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    r = math.isqrt(p)
    return all(p % f for f in range(3, r + 1, 2))


def _require_prime(p):
    if not is_prime(p):
        raise DomainError(f"modulus {p} is not prime")


@dataclass(frozen=True)
class FpVec:
    """A vector of F_p^n with coordinates reduced into [0, p)."""

    p: int
    coords: tuple[int, ...]

    def __post_init__(self):
        _require_prime(self.p)
        object.__setattr__(self, "coords", tuple(int(c) % self.p for c in self.coords))

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def index(self) -> int:
        idx = 0
        for c in self.coords:
            idx = idx * self.p + c
        return idx

    @classmethod
    def from_index(cls, p, n, index):
        coords = []
        for _ in range(n):
            index, r = divmod(index, p)
            coords.append(r)
        return cls(p, tuple(reversed(coords)))

    def _check(self, other):
        if other.p != self.p or other.n != self.n:
            raise DomainError("vectors live in different spaces")

    def __add__(self, other: FpVec) -> FpVec:
        self._check(other)
        return FpVec(self.p, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: FpVec) -> FpVec:
        self._check(other)
        return FpVec(self.p, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> FpVec:
        return FpVec(self.p, tuple(-a for a in self.coords))

    def __mul__(self, scalar: int) -> FpVec:
        return FpVec(self.p, tuple(scalar * a for a in self.coords))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)


def all_digits(p: int, n: int, budget=None) -> np.ndarray:
    """All of F_p^n as a ``(p**n, n)`` array of coordinates, lexicographic."""
    _require_prime(p)
    if n < 1:
        raise DomainError("dimension must be at least 1")
    check_budget(f"enumerating F_{p}^{n}", p**n, budget)
    idx = np.arange(p**n, dtype=np.int64)
    powers = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers) % p


def encode_digits(digits: np.ndarray, p: int) -> np.ndarray:
    n = digits.shape[-1]
    powers = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (np.asarray(digits, dtype=np.int64) % p) @ powers


def enumerate_vectors(p: int, n: int, budget=None) -> list[FpVec]:
    """Every vector of F_p^n exactly once, in lexicographic order."""
    return [FpVec(p, tuple(int(c) for c in row)) for row in all_digits(p, n, budget)]


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group presented either structurally or by its table.

    ``moduli`` is set for the abelian structured presentations; ``table`` for
    explicit ones.  Use the constructors :func:`cyclic`, :func:`vector_space`,
    :func:`product` and :func:`from_table` rather than calling this directly.
    """

    order: int
    name: str
    moduli: tuple[int, ...] | None = None
    table: np.ndarray | None = field(default=None, repr=False)
    identity: int = 0
    p: int | None = None  # set for F_p^n

    @cached_property
    def _strides(self):
        strides = []
        acc = 1
        for m in reversed(self.moduli):
            strides.append(acc)
            acc *= m
        return np.array(strides[::-1], dtype=np.int64)

    @cached_property
    def _inverse_table(self):
        rows, cols = np.nonzero(self.table == self.identity)
        inv = np.empty(self.order, dtype=np.int64)
        inv[rows] = cols
        return inv

    @property
    def structured(self) -> bool:
        return self.moduli is not None

    @cached_property
    def is_abelian(self) -> bool:
        if self.structured:
            return True
        return bool(np.array_equal(self.table, self.table.T))

    def elements(self, budget=None) -> np.ndarray:
        check_budget(f"enumerating {self.name}", self.order, budget)
        return np.arange(self.order, dtype=np.int64)

    def check_element(self, g):
        arr = np.asarray(g)
        if not np.issubdtype(arr.dtype, np.integer) or np.any(arr < 0) or np.any(arr >= self.order):
            raise DomainError(f"{g!r} is not an element index of {self.name}")

    def to_digits(self, a) -> np.ndarray:
        """Mixed-radix coordinates of element(s) ``a`` (structured groups only)."""
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._strides) % np.array(self.moduli, dtype=np.int64)

    def from_digits(self, digits) -> np.ndarray:
        digits = np.asarray(digits, dtype=np.int64) % np.array(self.moduli, dtype=np.int64)
        return digits @ self._strides

    def op(self, a, b):
        """Group operation, vectorized over numpy arrays of indices."""
        if self.structured:
            return self.from_digits(self.to_digits(a) + self.to_digits(b))
        return self.table[np.asarray(a), np.asarray(b)]

    def inv(self, a):
        if self.structured:
            return self.from_digits(-self.to_digits(a))
        return self._inverse_table[np.asarray(a)]

    def power(self, a, q: int):
        """``a**q`` (``q*a`` in additive notation); negative q allowed."""
        if self.structured:
            return self.from_digits(q * self.to_digits(a))
        a = np.asarray(a, dtype=np.int64)
        if q < 0:
            a, q = self.inv(a), -q
        result = np.full(a.shape, self.identity, dtype=np.int64)
        base = a
        while q:
            if q & 1:
                result = self.table[result, base]
            base = self.table[base, base]
            q >>= 1
        return result

    def to_json(self) -> dict:
        if self.structured:
            return {"name": self.name, "moduli": list(self.moduli)}
        return {"m": self.order, "identity": self.identity,
                "table": self.table.ravel().tolist()}


def cyclic(m: int) -> FiniteGroup:
    if m < 1:
        raise DomainError("cyclic group order must be positive")
    return FiniteGroup(order=m, name=f"cyclic:{m}", moduli=(m,))


def vector_space(p: int, n: int) -> FiniteGroup:
    _require_prime(p)
    if n < 1:
        raise DomainError("dimension must be at least 1")
    return FiniteGroup(order=p**n, name=f"vec:{p}^{n}", moduli=(p,) * n, p=p)


def from_table(table, identity: int | None = None) -> FiniteGroup:
    """Build a group from an ``m x m`` table, verifying the group axioms.

    Associativity is checked exhaustively for ``m <= 128`` only.
    """
    table = np.asarray(table, dtype=np.int64)
    if table.ndim != 2 or table.shape[0] != table.shape[1]:
        raise DomainError("operation table must be square")
    m = table.shape[0]
    if m > MAX_TABLE_ORDER:
        raise DomainError(f"explicit tables are capped at order {MAX_TABLE_ORDER}")
    full = np.arange(m)
    if np.any(table < 0) or np.any(table >= m):
        raise DomainError("table entries out of range")
    if not all(np.array_equal(np.sort(table[i]), full) for i in range(m)) or not all(
        np.array_equal(np.sort(table[:, j]), full) for j in range(m)
    ):
        raise DomainError("operation table is not a Latin square")
    ids = [e for e in range(m) if np.array_equal(table[e], full) and np.array_equal(table[:, e], full)]
    if not ids:
        raise DomainError("table has no two-sided identity")
    if identity is not None and identity != ids[0]:
        raise DomainError(f"declared identity {identity} is not the identity ({ids[0]})")
    e = ids[0]
    # Latin square + identity gives right inverses; require them two-sided.
    for g in range(m):
        h = int(np.flatnonzero(table[g] == e)[0])
        if table[h, g] != e:
            raise DomainError(f"element {g} has no two-sided inverse")
    if m <= 128:
        left = table[table[:, :, None], full[None, None, :]]
        right = table[full[:, None, None], table[None, :, :]]
        if not np.array_equal(left, right):
            raise DomainError("operation table is not associative")
    table.setflags(write=False)
    return FiniteGroup(order=m, name=f"table:{m}", table=table, identity=e)


def product(*groups: FiniteGroup) -> FiniteGroup:
    if not groups:
        raise DomainError("empty product")
    name = "prod(" + ",".join(g.name for g in groups) + ")"
    if all(g.structured for g in groups):
        moduli = tuple(m for g in groups for m in g.moduli)
        order = math.prod(moduli)
        return FiniteGroup(order=order, name=name, moduli=moduli)
    order = math.prod(g.order for g in groups)
    if order > MAX_TABLE_ORDER:
        raise DomainError(f"product with an explicit factor exceeds table cap {MAX_TABLE_ORDER}")
    # Materialize: element index is mixed radix over the factor orders.
    orders = [g.order for g in groups]
    strides = np.array([math.prod(orders[i + 1:]) for i in range(len(orders))], dtype=np.int64)
    idx = np.arange(order, dtype=np.int64)
    comps = (idx[:, None] // strides) % np.array(orders)
    table = np.zeros((order, order), dtype=np.int64)
    for i, g in enumerate(groups):
        c = comps[:, i]
        table += g.op(c[:, None], c[None, :]) * strides[i]
    grp = from_table(table)
    return FiniteGroup(order=order, name=name, table=grp.table, identity=grp.identity)


def dihedral(m: int) -> FiniteGroup:
    """Dihedral group of order 2m: element ``r^i s^j`` has index ``2*i + j``."""
    if m < 1:
        raise DomainError("dihedral parameter must be positive")
    table = np.empty((2 * m, 2 * m), dtype=np.int64)
    for a in range(2 * m):
        i1, j1 = divmod(a, 2)
        for b in range(2 * m):
            i2, j2 = divmod(b, 2)
            # r^i1 s^j1 r^i2 s^j2 = r^(i1 + (-1)^j1 i2) s^(j1+j2)
            i = (i1 + (i2 if j1 == 0 else -i2)) % m
            table[a, b] = 2 * i + (j1 ^ j2)
    grp = from_table(table)
    return FiniteGroup(order=2 * m, name=f"dihedral:{m}", table=grp.table, identity=grp.identity)


def element_order(G: FiniteGroup, g: int) -> int:
    """Smallest r >= 1 with g^r equal to the identity."""
    if not isinstance(g, (int, np.integer)) or not 0 <= g < G.order:
        raise DomainError(f"{g!r} is not an element index of {G.name}")
    if G.structured:
        r = 1
        for d, m in zip(G.to_digits(g), G.moduli):
            r = math.lcm(r, m // math.gcd(int(d), m))
        return r
    r, x = 1, int(g)
    while x != G.identity:
        x = int(G.table[x, g])
        r += 1
    return r


def power_map_is_permutation(G: FiniteGroup, q: int, budget=None) -> bool:
    """Whether u -> u^q is a bijection of G, by counting the image."""
    if q == 0:
        raise DomainError("exponent must be nonzero")
    image = G.power(G.elements(budget), q)
    return len(np.unique(image)) == G.order


def check_order_condition(G: FiniteGroup, q, budget=None):
    for j, qj in enumerate(q):
        if qj == 0 or not power_map_is_permutation(G, int(qj), budget):
            raise PreconditionError(
                f"q[{j}] = {qj}: u -> u^{qj} is not a permutation of {G.name}")


_ATOM = re.compile(r"^(cyclic):(\d+)$|^(vec):(\d+)\^(\d+)$|^table:@(.+)$")


def _split_top(s):
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(s[start:i])
            start = i + 1
    parts.append(s[start:])
    return [x.strip() for x in parts]


def load_table_group(path) -> FiniteGroup:
    data = json.loads(Path(path).read_text())
    m = int(data["m"])
    table = np.asarray(data["table"], dtype=np.int64).reshape(m, m)
    return from_table(table, identity=data.get("identity"))


def parse_group(text: str) -> FiniteGroup:
    """Parse ``cyclic:6``, ``vec:3^4``, ``prod(a,b,...)`` or ``table:@file.json``."""
    s = text.strip()
    if s.startswith("prod(") and s.endswith(")"):
        return product(*(parse_group(part) for part in _split_top(s[5:-1])))
    m = _ATOM.match(s)
    if not m:
        raise DomainError(f"cannot parse group presentation {text!r}")
    if m.group(1):
        return cyclic(int(m.group(2)))
    if m.group(3):
        return vector_space(int(m.group(4)), int(m.group(5)))
    return load_table_group(m.group(6))
