"""Polynomials over F_p and the rectangle construction that defeats small
direction sets.

Subsets of F_p^n are boolean masks of length p**n indexed lexicographically
(see :func:`arithx.field_group.all_digits`).  A rectangle T_1 x ... x T_p
contains the line through x with direction d when x + lambda*d lies in
T_{lambda+1} for every lambda in F_p; lines are counted as (x, d) pairs.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, InvariantViolation, PreconditionError, check_budget
from .field_group import FpVec, all_digits, encode_digits, is_prime, vector_space


def _reduce_exponent(e, p):
    # x^p = x as functions on F_p
    return e if e < p else (e - 1) % (p - 1) + 1


@dataclass(frozen=True, eq=False)
class FpPolynomial:
    """Multivariate polynomial over F_p in reduced form.

    Every exponent lies in [0, p-1] (higher powers are folded with x^p = x)
    and every stored coefficient is a nonzero residue.
    """

    p: int
    n: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        if not is_prime(self.p):
            raise DomainError(f"{self.p} is not prime")
        reduced = {}
        for exps, c in self.terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.n or min(exps, default=0) < 0:
                raise DomainError(f"bad exponent vector {exps}")
            key = tuple(_reduce_exponent(e, self.p) for e in exps)
            reduced[key] = (reduced.get(key, 0) + int(c)) % self.p
        object.__setattr__(self, "terms", {k: v for k, v in sorted(reduced.items()) if v})

    @classmethod
    def constant(cls, p, n, c):
        return cls(p, n, {(0,) * n: c})

    @classmethod
    def variable(cls, p, n, i):
        exps = [0] * n
        exps[i] = 1
        return cls(p, n, {tuple(exps): 1})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def _coerce(self, other):
        if isinstance(other, FpPolynomial):
            if (other.p, other.n) != (self.p, self.n):
                raise DomainError("polynomials over different rings")
            return other
        return FpPolynomial.constant(self.p, self.n, int(other))

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return FpPolynomial(self.p, self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return FpPolynomial(self.p, self.n, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms = {}
        for (e1, c1), (e2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            key = tuple(a + b for a, b in zip(e1, e2))
            terms[key] = terms.get(key, 0) + c1 * c2
        return FpPolynomial(self.p, self.n, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = FpPolynomial.constant(self.p, self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, point) -> int:
        coords = point.coords if isinstance(point, FpVec) else tuple(point)
        total = 0
        for exps, c in self.terms.items():
            total += c * math.prod(pow(int(x), e, self.p) for x, e in zip(coords, exps))
        return total % self.p

    def evaluate_all(self, digits: np.ndarray) -> np.ndarray:
        """Values at every row of a ``(N, n)`` coordinate array."""
        p = self.p
        digits = np.asarray(digits, dtype=np.int64) % p
        table = np.array([[pow(v, e, p) for e in range(p)] for v in range(p)], dtype=np.int64)
        out = np.zeros(len(digits), dtype=np.int64)
        for exps, c in self.terms.items():
            term = np.full(len(digits), c, dtype=np.int64)
            for j, e in enumerate(exps):
                if e:
                    term = (term * table[digits[:, j], e]) % p
            out = (out + term) % p
        return out

    def __eq__(self, other):
        if not isinstance(other, FpPolynomial):
            return NotImplemented
        return (self.p, self.n, self.terms) == (other.p, other.n, other.terms)

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return f"FpPolynomial(p={self.p}, 0)"
        parts = []
        for exps, c in self.terms.items():
            mono = "*".join(f"x{j + 1}" + (f"^{e}" if e > 1 else "") for j, e in enumerate(exps) if e)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return f"FpPolynomial(p={self.p}, {' + '.join(parts)})"

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "terms": [[list(e), c] for e, c in self.terms.items()]}

    @classmethod
    def from_json(cls, data) -> FpPolynomial:
        return cls(int(data["p"]), int(data["n"]), {tuple(e): int(c) for e, c in data["terms"]})


def rref_mod_p(M, p):
    """Reduced row echelon form over F_p; returns (matrix, pivot columns)."""
    A = np.asarray(M, dtype=np.int64) % p
    A = A.copy()
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if not len(nz):
            continue
        k = r + nz[0]
        A[[r, k]] = A[[k, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        others = np.flatnonzero(A[:, c])
        others = others[others != r]
        A[others] = (A[others] - np.outer(A[others, c], A[r])) % p
        pivots.append(c)
        r += 1
    return A, pivots


def first_kernel_vector(M, p):
    """Kernel vector of M over F_p built from the first free column, or None."""
    M = np.asarray(M, dtype=np.int64)
    cols = M.shape[1]
    if M.shape[0] == 0:
        v = np.zeros(cols, dtype=np.int64)
        v[0] = 1
        return v
    R, pivots = rref_mod_p(M, p)
    free = [c for c in range(cols) if c not in pivots]
    if not free:
        return None
    f = free[0]
    v = np.zeros(cols, dtype=np.int64)
    v[f] = 1
    for i, c in enumerate(pivots):
        v[c] = (-R[i, f]) % p
    return v


def homogeneous_monomials(n, d):
    """Exponent vectors of total degree d, x1^d first (descending lexicographic)."""
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + (left,))
            return
        for e in range(left, -1, -1):
            rec(prefix + (e,), left - e, slots - 1)

    rec((), d, n)
    return out


def _as_indices(points, p, n):
    """Element indices for a mask, an iterable of FpVec / coordinate tuples, or ints."""
    if isinstance(points, np.ndarray) and points.dtype == bool:
        if points.shape != (p**n,):
            raise DomainError("mask has the wrong length")
        return np.flatnonzero(points)
    out = []
    for x in points:
        if isinstance(x, FpVec):
            if x.p != p or x.n != n:
                raise DomainError(f"{x} is not in F_{p}^{n}")
            out.append(x.index)
        elif isinstance(x, (int, np.integer)):
            if not 0 <= x < p**n:
                raise DomainError(f"index {x} out of range")
            out.append(int(x))
        else:
            coords = tuple(x)
            if len(coords) != n:
                raise DomainError(f"{coords} is not in F_{p}^{n}")
            out.append(FpVec(p, coords).index)
    return np.unique(np.asarray(out, dtype=np.int64))


def as_mask(points, p, n) -> np.ndarray:
    mask = np.zeros(p**n, dtype=bool)
    mask[_as_indices(points, p, n)] = True
    return mask


def interpolate_homogeneous(D, d: int, p: int, n: int) -> FpPolynomial:
    """Nonzero homogeneous degree-d polynomial vanishing on D.

    The kernel of the evaluation matrix on degree-d monomials is nonempty
    when |D| < C(n+d-1, d).  Degrees are limited to d <= p-1, where distinct
    reduced polynomials are distinct functions.
    """
    if not 0 <= d <= p - 1:
        raise PreconditionError(f"degree {d} outside [0, p-1]")
    idx = _as_indices(D, p, n)
    dim = math.comb(n + d - 1, d)
    if len(idx) >= dim:
        raise PreconditionError(f"|D| = {len(idx)} is not below C(n+d-1, d) = {dim}")
    monos = homogeneous_monomials(n, d)
    digits = all_digits(p, n)[idx] if len(idx) else np.zeros((0, n), dtype=np.int64)
    M = np.ones((len(idx), len(monos)), dtype=np.int64)
    for m, exps in enumerate(monos):
        for j, e in enumerate(exps):
            if e:
                M[:, m] = (M[:, m] * (digits[:, j] ** e)) % p
    v = first_kernel_vector(M, p)
    if v is None:
        raise InvariantViolation("evaluation matrix has trivial kernel")
    f = FpPolynomial(p, n, {monos[m]: int(c) for m, c in enumerate(v) if c})
    if f.is_zero() or not f.is_homogeneous() or (len(idx) and np.any(f.evaluate_all(digits))):
        raise InvariantViolation("interpolant fails its postconditions")
    return f


def _values(f, budget):
    return f.evaluate_all(all_digits(f.p, f.n, budget))


def zero_set(f: FpPolynomial, budget=None) -> np.ndarray:
    """Mask of Z(f) = {x : f(x) = 0}."""
    return _values(f, budget) == 0


def level_set(f: FpPolynomial, a: int, budget=None) -> np.ndarray:
    """Mask of {x : f(x) = a} for a nonzero a."""
    if a % f.p == 0:
        raise DomainError("level value must be nonzero")
    return _values(f, budget) == a % f.p


def dlsz_bound_check(f: FpPolynomial, budget=None):
    """(|Z(f)|, (1 - q^(-d/(q-1))) q^n, holds) with d the reduced degree.

    The inequality is decided in integers: q^n - |Z| >= q^(n - d/(q-1))
    raised to the power q-1.
    """
    if f.is_zero():
        raise PreconditionError("the zero polynomial has no zero-set bound")
    q, n, d = f.p, f.n, f.degree
    zeros = int(zero_set(f, budget).sum())
    bound = (1.0 - q ** (-d / (q - 1))) * q**n
    holds = (q**n - zeros) ** (q - 1) >= q ** (n * (q - 1) - d)
    return zeros, bound, bool(holds)


def chevalley_warning_check(f_list, budget=None):
    """(#common zeros, p^(n-d), holds) where holds means count = 0 or count >= p^(n-d)."""
    f_list = list(f_list)
    if not f_list:
        raise PreconditionError("empty system")
    p, n = f_list[0].p, f_list[0].n
    if any((f.p, f.n) != (p, n) for f in f_list):
        raise DomainError("polynomials over different rings")
    if any(f.is_zero() for f in f_list):
        raise PreconditionError("Chevalley-Warning needs nonzero polynomials")
    d = sum(f.degree for f in f_list)
    if d >= n:
        raise PreconditionError(f"total degree {d} is not below n = {n}")
    digits = all_digits(p, n, budget)
    common = np.ones(len(digits), dtype=bool)
    for f in f_list:
        common &= f.evaluate_all(digits) == 0
    count = int(common.sum())
    bound = p ** (n - d)
    return count, bound, count == 0 or count >= bound


@dataclass(frozen=True, eq=False)
class Rectangle:
    """T_1 x ... x T_t with each T_s a mask over F_p^n."""

    p: int
    n: int
    sets: tuple

    @classmethod
    def from_points(cls, p, n, *sets):
        return cls(p, n, tuple(as_mask(T, p, n) for T in sets))

    @property
    def t(self) -> int:
        return len(self.sets)

    def contains_line(self, x, d) -> bool:
        x = x if isinstance(x, FpVec) else FpVec(self.p, tuple(x))
        d = d if isinstance(d, FpVec) else FpVec(self.p, tuple(d))
        return all(self.sets[lam][(x + lam * d).index] for lam in range(self.p))


def _require_line_rectangle(R):
    if R.t != R.p:
        raise DomainError(f"line containment needs p = {R.p} factor sets, got {R.t}")


def count_lines(R: Rectangle, D=None, budget=None) -> int:
    """Number of pairs (x, d), d in D, with the line through x in direction d in R.

    ``D=None`` counts all directions of F_p^n.
    """
    _require_line_rectangle(R)
    p, n = R.p, R.n
    digits = all_digits(p, n, budget)
    if D is None:
        return len(_all_lines(R, digits, budget))
    dirs = _as_indices(D, p, n)
    check_budget("line enumeration", p**n * len(dirs), budget)
    total = 0
    for d in digits[dirs]:
        inside = np.ones(len(digits), dtype=bool)
        for lam in range(p):
            inside &= R.sets[lam][encode_digits(digits + lam * d, p)]
        total += int(inside.sum())
    return total


def _all_lines(R, digits, budget=None):
    """All contained (x, d) pairs as an index array of shape (N, 2)."""
    p = R.p
    T1 = np.flatnonzero(R.sets[0])
    T2 = np.flatnonzero(R.sets[1])
    check_budget("line enumeration", len(T1) * len(T2), budget)
    z = digits[T2]
    found = []
    for x in T1:
        xd = digits[x]
        y = (z - xd) % p
        ok = np.ones(len(T2), dtype=bool)
        for lam in range(2, p):
            ok &= R.sets[lam][encode_digits(xd + lam * y, p)]
        if ok.any():
            ys = encode_digits(y[ok], p)
            found.append(np.stack([np.full(len(ys), x), ys], axis=1))
    return np.concatenate(found) if found else np.zeros((0, 2), dtype=np.int64)


def lines_with_directions(R: Rectangle, D, budget=None) -> list[tuple[int, int]]:
    """Contained (x, d) index pairs with d in D."""
    _require_line_rectangle(R)
    p, n = R.p, R.n
    digits = all_digits(p, n, budget)
    dirs = _as_indices(D, p, n)
    out = []
    for di in dirs:
        inside = np.ones(len(digits), dtype=bool)
        for lam in range(p):
            inside &= R.sets[lam][encode_digits(digits + lam * digits[di], p)]
        out.extend((int(x), int(di)) for x in np.flatnonzero(inside))
    return out


def line_hypergraph(p, n, D):
    """L_D: the Cayley hypergraph of F_p^n with generators (0, y, 2y, ..., (p-1)y), y in D."""
    from .hypergraph import ap_steps, cayley_hypergraph

    G = vector_space(p, n)
    return cayley_hypergraph(G, [1] * p, ap_steps(G, _as_indices(D, p, n), p))


def ldlines_identity_check(T1, T2, D, p: int, n: int):
    """Both sides of A_{L_D}(1_T1, 1_T2, ..., 1_T2) = #lines(T1 x T2 x ... x T2, D) / |D|."""
    from .hypergraph import adjacency_form

    m1, m2 = as_mask(T1, p, n), as_mask(T2, p, n)
    if np.any(m1 & m2):
        raise PreconditionError("T1 and T2 must be disjoint")
    dirs = _as_indices(D, p, n)
    if not len(dirs):
        raise PreconditionError("direction set is empty")
    form = adjacency_form(line_hypergraph(p, n, dirs))
    x1, x2 = m1.astype(np.int64), m2.astype(np.int64)
    lhs = form.evaluate(x1, *([x2] * (p - 1)))
    rect = Rectangle(p, n, (m1,) + (m2,) * (p - 1))
    rhs = Fraction(count_lines(rect, dirs), len(dirs))
    return lhs, rhs, lhs == rhs


@dataclass
class DensecapResult:
    p: int
    n: int
    directions: np.ndarray
    f: FpPolynomial
    a: int
    T1: np.ndarray
    T2: np.ndarray
    line_count: int
    bound: int
    violations: list
    witness_ok: bool

    @property
    def rectangle(self) -> Rectangle:
        return Rectangle(self.p, self.n, (self.T1,) + (self.T2,) * (self.p - 1))

    @property
    def passed(self) -> bool:
        return not self.violations and self.line_count >= self.bound and self.witness_ok


def densecap_construct(D, p: int, n: int, strict_n: bool = False, budget=None,
                       check: bool = True) -> DensecapResult:
    """Disjoint T1, T2 whose rectangle T1 x T2 x ... x T2 holds many lines
    but none with direction in D.

    T1 is the zero set of a homogeneous degree-(p-1) interpolant of D and T2
    its first nonempty nonzero level set.  The count bound p^(2n+p-p^2) needs
    2n > p^2 - p; ``strict_n`` demands n >= p^2 instead.
    """
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    dirs = _as_indices(D, p, n)
    cap = math.comb(n + p - 2, p - 1)
    if len(dirs) >= cap:
        raise PreconditionError(f"|D| = {len(dirs)} is not below C(n+p-2, p-1) = {cap}")
    if strict_n and n < p * p:
        raise PreconditionError(f"strict mode needs n >= p^2 = {p * p}")
    if 2 * n <= p * p - p:
        raise PreconditionError(f"need 2n > p^2 - p, got n = {n}")
    f = interpolate_homogeneous(dirs, p - 1, p, n)
    digits = all_digits(p, n, budget)
    values = f.evaluate_all(digits)
    T1 = values == 0
    a = next((a for a in range(1, p) if np.any(values == a)), None)
    if a is None:
        raise InvariantViolation("interpolant vanishes everywhere")
    T2 = values == a
    rect = Rectangle(p, n, (T1,) + (T2,) * (p - 1))
    line_count = len(_all_lines(rect, digits, budget))
    violations = lines_with_directions(rect, dirs) if len(dirs) else []
    y = digits[np.flatnonzero(T2)[0]]
    witness_ok = bool(T1[0]) and all(
        f.evaluate_all(((lam * y) % p)[None, :])[0] == a for lam in range(1, p))
    bound = p ** (2 * n + p - p * p)
    result = DensecapResult(p, n, dirs, f, a, T1, T2, line_count, bound, violations, witness_ok)
    if check and not result.passed:
        raise InvariantViolation(
            f"densecap failed: {len(violations)} D-lines, {line_count} lines vs bound {bound}")
    return result


def random_directions(p, n, size, rng) -> np.ndarray:
    if size > p**n:
        raise DomainError("more directions requested than points")
    return np.sort(rng.choice(p**n, size=size, replace=False))


def load_directions(path, p, n) -> np.ndarray:
    """Read a JSON array of coordinate vectors."""
    with open(path) as fh:
        return _as_indices([tuple(v) for v in json.load(fh)], p, n)
