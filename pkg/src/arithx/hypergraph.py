"""Hypergraphs, Cayley (hyper)graphs and their adjacency forms.

Edge convention: a hypergraph stores each edge as a sorted vertex tuple with
the number of times it was generated.  The adjacency form puts weight
``multiplicity * prod(m_v!)`` on every ordering of an edge, where ``m_v`` are
the repetition counts inside the edge.  For permutation hypergraphs this is
exactly the ordered count obtained by summing over all argument permutations,
and it makes a hypergraph generated by one family of t permutations
``t!``-regular.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import DomainError, PreconditionError, check_budget
from .field_group import FiniteGroup, check_order_condition

_INT64_SAFE = 2**62


def _as_int_array(values):
    arr = np.asarray(values)
    if arr.dtype == object:
        if all(abs(int(v)) < _INT64_SAFE for v in arr.ravel()):
            return arr.astype(np.int64)
        return arr
    return arr.astype(np.int64)


def _scale(num, factor):
    if factor == 1:
        return num
    if num.dtype != object and (num.size == 0 or int(np.abs(num).max()) * abs(factor) < _INT64_SAFE):
        return num * factor
    return num.astype(object) * factor


def _rational_vector(x):
    """Split a vector of rationals into (integer numerators, common denominator)."""
    fr = [Fraction(v) for v in x]
    den = math.lcm(*(f.denominator for f in fr)) if fr else 1
    return np.array([f.numerator * (den // f.denominator) for f in fr], dtype=object), den


@dataclass(frozen=True, eq=False)
class MultilinearForm:
    """Sparse t-linear form on R^n with exact rational coefficients.

    ``index`` holds the distinct ordered index tuples with nonzero
    coefficient ``num[i] / den``.
    """

    t: int
    n: int
    index: np.ndarray
    num: np.ndarray
    den: int = 1

    @classmethod
    def from_rows(cls, t, n, index, num, den=1):
        """Aggregate duplicate rows, drop zeros and reduce the fraction."""
        index = np.asarray(index, dtype=np.int64).reshape(-1, t)
        num = _as_int_array(num).reshape(-1)
        if den <= 0:
            raise DomainError("denominator must be positive")
        if index.size and (index.min() < 0 or index.max() >= n):
            raise DomainError("index out of range")
        if len(index):
            keys = np.ravel_multi_index(index.T, (n,) * t) if n**t < 2**62 else None
            if keys is None:
                uniq, inverse = np.unique(index, axis=0, return_inverse=True)
            else:
                ukeys, inverse = np.unique(keys, return_inverse=True)
                uniq = np.stack(np.unravel_index(ukeys, (n,) * t), axis=1).astype(np.int64)
            if num.dtype == object:
                summed = np.zeros(len(uniq), dtype=object)
                np.add.at(summed, inverse.ravel(), num)
            else:
                summed = np.zeros(len(uniq), dtype=np.int64)
                np.add.at(summed, inverse.ravel(), num)
            keep = summed != 0
            index, num = uniq[keep], summed[keep]
        else:
            index = np.zeros((0, t), dtype=np.int64)
            num = np.zeros(0, dtype=np.int64)
        g = math.gcd(den, *(int(v) for v in np.unique(np.abs(num)))) if len(num) else den
        if g > 1:
            num = num // g
            den //= g
        if not len(num):
            den = 1
        return cls(t, n, index, num, den)

    @classmethod
    def from_entries(cls, t, n, entries: dict):
        """Build from ``{(i1, ..., it): rational}``."""
        if not entries:
            return cls.zero(t, n)
        values = [Fraction(v) for v in entries.values()]
        den = math.lcm(*(v.denominator for v in values))
        num = np.array([v.numerator * (den // v.denominator) for v in values], dtype=object)
        return cls.from_rows(t, n, list(entries.keys()), num, den)

    @classmethod
    def zero(cls, t, n):
        return cls(t, n, np.zeros((0, t), dtype=np.int64), np.zeros(0, dtype=np.int64), 1)

    @cached_property
    def entries(self) -> dict:
        return {tuple(int(i) for i in row): Fraction(int(v), self.den)
                for row, v in zip(self.index, self.num)}

    @property
    def nnz(self) -> int:
        return len(self.num)

    def is_zero(self) -> bool:
        return self.nnz == 0

    @cached_property
    def values(self) -> np.ndarray:
        """Coefficients as floats (the norm-estimation boundary)."""
        return np.array([int(v) for v in self.num], dtype=float) / self.den if self.num.dtype == object \
            else self.num.astype(float) / self.den

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n,) * self.t)
        if self.nnz:
            np.add.at(out, tuple(self.index.T), self.values)
        return out

    def _check_compatible(self, other):
        if self.t != other.t or self.n != other.n:
            raise DomainError("forms have different arity or dimension")

    def __add__(self, other: MultilinearForm) -> MultilinearForm:
        self._check_compatible(other)
        den = math.lcm(self.den, other.den)
        num = np.concatenate([_scale(self.num, den // self.den), _scale(other.num, den // other.den)])
        if num.dtype != object and any(a.dtype == object for a in (self.num, other.num)):
            num = num.astype(object)
        return MultilinearForm.from_rows(self.t, self.n, np.concatenate([self.index, other.index]), num, den)

    def __neg__(self) -> MultilinearForm:
        return MultilinearForm(self.t, self.n, self.index, -self.num, self.den)

    def __sub__(self, other: MultilinearForm) -> MultilinearForm:
        return self + (-other)

    def __mul__(self, c) -> MultilinearForm:
        c = Fraction(c)
        if c == 0:
            return MultilinearForm.zero(self.t, self.n)
        return MultilinearForm.from_rows(self.t, self.n, self.index,
                                         _scale(self.num, c.numerator), self.den * c.denominator)

    __rmul__ = __mul__

    def __truediv__(self, c) -> MultilinearForm:
        return self * (1 / Fraction(c))

    def abs(self) -> MultilinearForm:
        return MultilinearForm(self.t, self.n, self.index, np.abs(self.num), self.den)

    def __eq__(self, other):
        if not isinstance(other, MultilinearForm):
            return NotImplemented
        return self.t == other.t and self.n == other.n and self.entries == other.entries

    __hash__ = None

    def evaluate(self, *xs):
        """A(x[1], ..., x[t]).

        Exact (a Fraction) when every argument holds ints or Fractions,
        float otherwise.
        """
        if len(xs) != self.t:
            raise DomainError(f"expected {self.t} vectors, got {len(xs)}")
        arrays = [np.asarray(x) for x in xs]
        for a in arrays:
            if a.shape != (self.n,):
                raise DomainError(f"vector of shape {a.shape}, expected ({self.n},)")
        if any(np.issubdtype(a.dtype, np.floating) for a in arrays):
            prod = self.values.copy()
            for s, a in enumerate(arrays):
                prod *= a.astype(float)[self.index[:, s]]
            return float(prod.sum())
        total_den = self.den
        prod = self.num.astype(object) if self.num.dtype == object else self.num
        for s, a in enumerate(arrays):
            if a.dtype == object:
                ints, d = _rational_vector(a)
            else:
                ints, d = a.astype(np.int64), 1
            total_den *= d
            factor = ints[self.index[:, s]]
            bound = (int(np.abs(prod).max()) if prod.size else 0) * (int(np.abs(factor).max()) if factor.size else 0)
            if prod.dtype == object or factor.dtype == object or bound >= _INT64_SAFE:
                prod = prod.astype(object) * factor.astype(object)
            else:
                prod = prod * factor
        return Fraction(int(prod.sum()) if prod.size else 0, total_den)

    def marginal_sums(self, slot: int) -> np.ndarray:
        """Integer numerators of |A|(1, .., e_s, .., 1) over s (divide by ``den``)."""
        out = np.zeros(self.n, dtype=object if self.num.dtype == object else np.int64)
        np.add.at(out, self.index[:, slot], np.abs(self.num))
        return out

    def is_symmetric(self) -> bool:
        ent = self.entries
        return all(ent.get(tuple(key[i] for i in perm)) == v
                   for key, v in ent.items() for perm in itertools.permutations(range(self.t)))

    def to_json(self) -> dict:
        return {"t": self.t, "n": self.n,
                "entries": [[[int(i) for i in row], str(Fraction(int(v), self.den))]
                            for row, v in zip(self.index, self.num)]}

    @classmethod
    def from_json(cls, data: dict) -> MultilinearForm:
        t, n = int(data["t"]), int(data["n"])
        return cls.from_entries(t, n, {tuple(row): Fraction(v) for row, v in data["entries"]})


def indicator(n: int, members) -> np.ndarray:
    x = np.zeros(n, dtype=np.int64)
    x[np.asarray(list(members), dtype=np.int64)] = 1
    return x


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """t-uniform hypergraph with sorted-tuple edges and multiplicities."""

    t: int
    vertex_count: int
    edges: np.ndarray
    multiplicity: np.ndarray
    degree: int | None

    @classmethod
    def from_rows(cls, t, vertex_count, rows, counts=None):
        """Hypergraph whose edges are the (unsorted) rows, each counted once or ``counts`` times."""
        if t < 2:
            raise DomainError("uniformity must be at least 2")
        rows = np.sort(np.asarray(rows, dtype=np.int64).reshape(-1, t), axis=1)
        if rows.size and (rows.min() < 0 or rows.max() >= vertex_count):
            raise DomainError("edge vertex out of range")
        counts = np.ones(len(rows), dtype=np.int64) if counts is None else np.asarray(counts, dtype=np.int64)
        if np.any(counts <= 0):
            raise DomainError("multiplicities must be positive")
        if len(rows):
            edges, inverse = np.unique(rows, axis=0, return_inverse=True)
            mult = np.zeros(len(edges), dtype=np.int64)
            np.add.at(mult, inverse.ravel(), counts)
        else:
            edges, mult = np.zeros((0, t), dtype=np.int64), np.zeros(0, dtype=np.int64)
        deg = np.zeros(vertex_count, dtype=np.int64)
        np.add.at(deg, edges.ravel(), np.repeat(mult, t))
        deg *= math.factorial(t - 1)
        degree = int(deg[0]) if vertex_count and np.all(deg == deg[0]) else None
        return cls(t, vertex_count, edges, mult, degree)

    @property
    def is_regular(self) -> bool:
        return self.degree is not None

    def vertex_degrees(self) -> np.ndarray:
        deg = np.zeros(self.vertex_count, dtype=np.int64)
        np.add.at(deg, self.edges.ravel(), np.repeat(self.multiplicity, self.t))
        return deg * math.factorial(self.t - 1)

    def union(self, other: Hypergraph) -> Hypergraph:
        if self.t != other.t or self.vertex_count != other.vertex_count:
            raise DomainError("hypergraphs differ in uniformity or vertex set")
        return Hypergraph.from_rows(self.t, self.vertex_count,
                                    np.concatenate([self.edges, other.edges]),
                                    np.concatenate([self.multiplicity, other.multiplicity]))

    def edge_count(self, *vertices) -> int:
        """Ordered count e_H(u_1, ..., u_t) under the permutation-sum convention."""
        key = tuple(sorted(vertices))
        hit = np.flatnonzero(np.all(self.edges == np.array(key), axis=1))
        if not len(hit):
            return 0
        stab = math.prod(math.factorial(c) for c in np.unique(key, return_counts=True)[1])
        return int(self.multiplicity[hit[0]]) * stab

    def to_json(self) -> dict:
        return {"t": self.t, "vertex_count": self.vertex_count,
                "edges": [[[int(v) for v in e], int(m)] for e, m in zip(self.edges, self.multiplicity)],
                "degree": self.degree}

    @classmethod
    def from_json(cls, data) -> Hypergraph:
        if isinstance(data, str):
            data = json.loads(data)
        t = int(data["t"])
        rows = [e for e, _ in data["edges"]]
        counts = [m for _, m in data["edges"]]
        h = cls.from_rows(t, int(data["vertex_count"]), np.array(rows, dtype=np.int64).reshape(-1, t), counts)
        if data.get("degree") is not None and data["degree"] != h.degree:
            raise DomainError(f"declared degree {data['degree']} does not match computed {h.degree}")
        return h


def permutation_hypergraph(perms) -> Hypergraph:
    """The t!-regular hypergraph with edges {pi_1(v), ..., pi_t(v)}, v in V."""
    perms = [np.asarray(p, dtype=np.int64) for p in perms]
    if len(perms) < 2:
        raise DomainError("need at least two permutations")
    V = len(perms[0])
    for p in perms:
        if len(p) != V or not np.array_equal(np.sort(p), np.arange(V)):
            raise DomainError("input is not a bijection of the vertex set")
    return Hypergraph.from_rows(len(perms), V, np.stack(perms, axis=1))


def cayley_graph(G: FiniteGroup, S) -> Hypergraph:
    """The 2|S|-regular Cayley graph with edges {u, g u} for g in S."""
    S = np.asarray(list(S), dtype=np.int64)
    if not len(S):
        raise DomainError("generator multiset is empty")
    G.check_element(S)
    u = G.elements()
    rows = np.concatenate([np.stack([u, G.op(g, u)], axis=1) for g in S])
    return Hypergraph.from_rows(2, G.order, rows)


def cayley_adjacency_matrix(G: FiniteGroup, S) -> np.ndarray:
    """Normalized adjacency matrix of cay(G, S), built directly (float)."""
    S = np.asarray(list(S), dtype=np.int64)
    if not len(S):
        raise DomainError("generator multiset is empty")
    u = G.elements()
    M = np.zeros((G.order, G.order))
    for g in S:
        v = G.op(g, u)
        np.add.at(M, (u, v), 1.0)
        np.add.at(M, (v, u), 1.0)
    return M / (2 * len(S))


def _generator_rows(G, q, S):
    S = np.asarray(S, dtype=np.int64).reshape(len(S), len(q))
    G.check_element(S)
    u = G.elements()
    powers = [G.power(u, int(qj)) for qj in q]
    blocks = []
    for g in S:
        blocks.append(np.stack([G.op(powers[j], g[j]) for j in range(len(q))], axis=1))
    return np.concatenate(blocks)


def cayley_hypergraph(G: FiniteGroup, q, S) -> Hypergraph:
    """cay^(t)(G, q, S): union over g in S of the permutation hypergraphs
    with pi_j(u) = u^{q_j} g[j].  (t!)|S|-regular."""
    q = [int(x) for x in q]
    S = list(S)
    if not S:
        raise DomainError("generator multiset is empty")
    if len(q) < 2:
        raise DomainError("need t >= 2")
    check_order_condition(G, q)
    rows = _generator_rows(G, q, S)
    return Hypergraph.from_rows(len(q), G.order, rows)


def adjacency_form(H: Hypergraph, normalized: bool = True) -> MultilinearForm:
    if normalized and not H.is_regular:
        raise DomainError("cannot normalize an irregular hypergraph")
    t = H.t
    index = np.concatenate([H.edges[:, list(perm)] for perm in itertools.permutations(range(t))])
    num = np.tile(H.multiplicity, math.factorial(t))
    return MultilinearForm.from_rows(t, H.vertex_count, index, num, H.degree if normalized else 1)


def slice_form(G: FiniteGroup, q, g) -> MultilinearForm:
    """Normalized adjacency form of the single-generator hypergraph cay(G, q, {g})."""
    return adjacency_form(cayley_hypergraph(G, q, [g]), normalized=True)


# Translation-invariant systems


def ap_matrix(t: int) -> np.ndarray:
    """The (t-2) x t matrix whose kernel is the t-term arithmetic progressions."""
    if t < 3:
        raise DomainError("AP systems need t >= 3")
    C = np.zeros((t - 2, t), dtype=np.int64)
    for r in range(t - 2):
        C[r, r:r + 3] = (1, -2, 1)
    return C


def _is_ap(C) -> bool:
    C = np.asarray(C)
    return C.ndim == 2 and C.shape[1] >= 3 and np.array_equal(C, ap_matrix(C.shape[1]))


def _require_abelian(G):
    if not G.is_abelian:
        raise DomainError(f"{G.name} is not abelian")


def _linear_image(G, C, h):
    """C h for an array of tuples h of shape (N, t); returns (N, s)."""
    out = []
    for row in C:
        acc = np.full(len(h), G.identity, dtype=np.int64)
        for j, c in enumerate(row):
            if c:
                acc = G.op(acc, G.power(h[:, j], int(c)))
        out.append(acc)
    return np.stack(out, axis=1) if out else np.zeros((len(h), 0), dtype=np.int64)


def in_solution_set(C, G: FiniteGroup, h) -> np.ndarray:
    """Row-wise test of C h = 0 for tuples h of shape (N, t)."""
    C = np.atleast_2d(np.asarray(C, dtype=np.int64))
    _require_abelian(G)
    h = np.asarray(h, dtype=np.int64).reshape(-1, C.shape[1])
    G.check_element(h)
    return np.all(_linear_image(G, C, h) == G.identity, axis=1)


def sol_generator(C, G: FiniteGroup, budget=None, fast_path=True) -> np.ndarray:
    """All h in G^t with C h = 0, as an (N, t) array in lexicographic order."""
    C = np.atleast_2d(np.asarray(C, dtype=np.int64))
    _require_abelian(G)
    t = C.shape[1]
    zero = G.identity
    if fast_path and _is_ap(C):
        check_budget("AP solution set", G.order**2, budget)
        a, d = np.meshgrid(G.elements(), G.elements(), indexing="ij")
        a, d = a.ravel(), d.ravel()
        h = np.stack([G.op(a, G.power(d, j)) for j in range(t)], axis=1)
    else:
        check_budget(f"enumerating {G.name}^{t}", G.order**t, budget)
        h = np.stack(np.unravel_index(np.arange(G.order**t), (G.order,) * t), axis=1).astype(np.int64)
        h = h[np.all(_linear_image(G, C, h) == zero, axis=1)]
    order = np.lexsort(h.T[::-1])
    return h[order]


def coset_representatives(C, q, G: FiniteGroup, budget=None, fast_path=True) -> np.ndarray:
    """One representative per coset of {(q_1 u, ..., q_t u)} in sol(C)."""
    C = np.atleast_2d(np.asarray(C, dtype=np.int64))
    q = np.asarray(q, dtype=np.int64)
    if C.shape[1] != len(q):
        raise DomainError("C and q have incompatible shapes")
    if np.any(C @ q != 0):
        raise PreconditionError(f"C q = {(C @ q).tolist()} is not zero")
    _require_abelian(G)
    check_order_condition(G, q, budget)
    t = len(q)
    u = G.elements(budget)
    if fast_path and _is_ap(C):
        if np.all(q == 1):
            return np.stack([G.power(u, j) for j in range(t)], axis=1)
        if np.array_equal(q, np.arange(1, t + 1)):
            return np.repeat(u[:, None], t, axis=1)
    sol = sol_generator(C, G, budget, fast_path=fast_path)
    shifts = np.stack([G.power(u, int(qj)) for qj in q], axis=1)
    shape = (G.order,) * t
    seen = np.zeros(G.order**t, dtype=bool)
    reps = []
    for h in sol:
        key = np.ravel_multi_index(tuple(h), shape)
        if seen[key]:
            continue
        reps.append(h)
        orbit = np.stack([G.op(shifts[:, j], h[j]) for j in range(t)], axis=1)
        seen[np.ravel_multi_index(tuple(orbit.T), shape)] = True
    return np.array(reps, dtype=np.int64).reshape(-1, t)


def ap_steps(G: FiniteGroup, D, t: int) -> list[tuple[int, ...]]:
    """Generator tuples (0, y, 2y, ..., (t-1)y) for each step y in D."""
    D = np.asarray(list(D), dtype=np.int64)
    return [tuple(int(G.power(y, j)) for j in range(t)) for y in D]


def load_system(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``{"C": [[...], ...], "q": [...]}``."""
    with open(path) as fh:
        data = json.load(fh)
    return np.atleast_2d(np.asarray(data["C"], dtype=np.int64)), np.asarray(data["q"], dtype=np.int64)

