"""Injective l_p norms of multilinear forms and the expansion parameter lambda_K.

The norm is estimated by alternating ascent: with all but one argument fixed
the form is a linear functional, maximized over the l_p unit ball in closed
form.  Each such block update can only increase the objective, so every
restart returns a feasible point and the result is a certified lower bound.
Exact values are available for small instances through
:func:`multilinear_norm_oracle`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, InvariantViolation, UnsupportedRegimeError
from .hypergraph import Hypergraph, MultilinearForm, adjacency_form
from .rng import rademacher, substream

DEFAULT_TOL = 1e-9
_MONOTONE_SLACK = 1e-10


@dataclass
class NormEstimate:
    value: float
    kind: str  # "exact" | "certified_lower_bound" | "upper_bound"
    witness: tuple | None = None
    restarts_used: int = 0
    iterations: int = 0
    tolerance: float = 0.0
    upper: float | None = None

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "kind": self.kind,
            "upper": self.upper,
            "restarts_used": self.restarts_used,
            "iterations": self.iterations,
            "tolerance": self.tolerance,
            "witness": None if self.witness is None else [w.tolist() for w in self.witness],
        }


def lp_norm(x, p) -> float:
    x = np.abs(np.asarray(x, dtype=float))
    if p == math.inf:
        return float(x.max(initial=0.0))
    if p == 1:
        return float(x.sum())
    m = x.max(initial=0.0)
    if m == 0:
        return 0.0
    return float(m * np.sum((x / m) ** p) ** (1.0 / p))


def _row_norms(X, p) -> np.ndarray:
    A = np.abs(np.asarray(X, dtype=float))
    if p == math.inf:
        return A.max(axis=1)
    if p == 1:
        return A.sum(axis=1)
    m = A.max(axis=1)
    safe = np.where(m > 0, m, 1.0)
    return m * np.sum((A / safe[:, None]) ** p, axis=1) ** (1.0 / p)


def dual_exponent(p) -> float:
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1)


def _check_p(p):
    if not (p == math.inf or p >= 1):
        raise DomainError(f"exponent {p} outside [1, inf]")


def _dual_argmax_rows(C: np.ndarray, p) -> np.ndarray:
    """Row-wise maximizer of <c, x> over the l_p unit sphere; rows must be nonzero."""
    if p == math.inf:
        return np.where(C < 0, -1.0, 1.0)
    if p == 1:
        X = np.zeros_like(C)
        j = np.argmax(np.abs(C), axis=1)
        rows = np.arange(len(C))
        X[rows, j] = np.sign(C[rows, j])
        return X
    scale = np.abs(C).max(axis=1, keepdims=True)
    Y = np.sign(C) * (np.abs(C) / scale) ** (1.0 / (p - 1))
    norms = np.sum(np.abs(Y) ** p, axis=1, keepdims=True) ** (1.0 / p)
    return Y / norms


def dual_ball_argmax(c, p) -> np.ndarray:
    """Unit l_p vector maximizing <c, x>.

    Sign vector for p = inf, a single signed coordinate (lowest index on ties)
    for p = 1, and x_i proportional to sign(c_i)|c_i|^(1/(p-1)) otherwise.
    """
    _check_p(p)
    c = np.asarray(c, dtype=float)
    if not np.any(c):
        raise DomainError("cannot maximize against the zero vector")
    return _dual_argmax_rows(c[None, :], p)[0]


class CooForm:
    """Float view of a multilinear form for batched contractions.

    Vectors are passed as ``(R, n)`` arrays so R ascent restarts run at once.
    """

    def __init__(self, t, n, index, values):
        self.t, self.n = t, n
        self.index = np.asarray(index, dtype=np.int64).reshape(-1, t)
        self.values = np.asarray(values, dtype=float)
        nnz = len(self.values)
        self._select = [
            sp.csr_matrix((np.ones(nnz), (np.arange(nnz), self.index[:, s])), shape=(nnz, n))
            for s in range(t)
        ]

    @classmethod
    def from_form(cls, A: MultilinearForm) -> CooForm:
        return cls(A.t, A.n, A.index, A.values)

    @classmethod
    def combine(cls, forms, weights) -> CooForm:
        """Float form sum(w_i * A_i) with duplicate indices merged."""
        t, n = forms[0].t, forms[0].n
        idx = np.concatenate([f.index for f in forms])
        vals = np.concatenate([w * f.values for f, w in zip(forms, weights)])
        if not len(idx):
            return cls(t, n, idx, vals)
        keys = np.ravel_multi_index(idx.T, (n,) * t)
        ukeys, inv = np.unique(keys, return_inverse=True)
        summed = np.bincount(inv.ravel(), weights=vals, minlength=len(ukeys))
        keep = summed != 0
        uidx = np.stack(np.unravel_index(ukeys[keep], (n,) * t), axis=1)
        return cls(t, n, uidx, summed[keep])

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    def _partial(self, X, skip):
        prod = np.broadcast_to(self.values, (X[0].shape[0], len(self.values))).copy()
        for j in range(self.t):
            if j != skip:
                prod *= X[j][:, self.index[:, j]]
        return prod

    def gradient(self, X, s) -> np.ndarray:
        prod = self._partial(X, s)
        return np.asarray((self._select[s].T @ prod.T).T)

    def evaluate(self, X) -> np.ndarray:
        return self._partial(X, -1).sum(axis=1)


def _ascend(form: CooForm, X, step, tol, max_sweeps):
    """Batched block-coordinate ascent; ``step(G, s)`` maximizes <g, x> row-wise.

    Returns (final X, objective per row, sweeps used).
    """
    X = [x.copy() for x in X]
    obj = form.evaluate(X)
    active = np.ones(len(obj), dtype=bool)
    sweeps = 0
    while active.any() and sweeps < max_sweeps:
        sweeps += 1
        start = obj.copy()
        for s in range(form.t):
            rows = np.flatnonzero(active)
            sub = [x[rows] for x in X]
            G = form.gradient(sub, s)
            moving = np.any(G != 0, axis=1)
            if not moving.any():
                continue
            r = rows[moving]
            X[s][r] = step(G[moving], s)
            new = np.einsum("ij,ij->i", G[moving], X[s][r])
            slack = _MONOTONE_SLACK * np.maximum(1.0, np.abs(obj[r]))
            if np.any(new < obj[r] - slack):
                raise InvariantViolation("alternating ascent decreased the objective")
            obj[r] = np.maximum(new, obj[r])
        active &= (obj - start) >= tol
    return X, form.evaluate(X), sweeps


def _normalize_rows(X, p):
    norms = _row_norms(X, p)
    if np.any(norms == 0):
        raise DomainError("start vectors must be nonzero")
    return X / norms[:, None]


def _zero_estimate(t, n):
    e = np.zeros(n)
    e[0] = 1.0
    return NormEstimate(0.0, "exact", tuple(e.copy() for _ in range(t)))


def multilinear_norm(A, p, restarts: int = 8, seeds=(), tol: float = DEFAULT_TOL,
                     seed: int = 0, max_sweeps: int = 1000) -> NormEstimate:
    """Lower bound on ||A||_{l_p,...,l_p} by alternating ascent.

    Starts are: the all-ones tuple, every tuple in ``seeds``, and ``restarts``
    Gaussian tuples drawn from the substream ``(seed, restart)``.
    """
    _check_p(p)
    if restarts < 1:
        raise DomainError("need at least one restart")
    form = A if isinstance(A, CooForm) else CooForm.from_form(A)
    t, n = form.t, form.n
    if form.is_zero:
        return _zero_estimate(t, n)
    starts = [[np.ones(n) for _ in range(t)]]
    for tup in seeds:
        if len(tup) != t:
            raise DomainError(f"seed tuple has {len(tup)} vectors, expected {t}")
        starts.append([np.asarray(v, dtype=float) for v in tup])
    for r in range(restarts):
        rng = substream(seed, r)
        starts.append([rng.standard_normal(n) for _ in range(t)])
    X = [_normalize_rows(np.stack([st[s] for st in starts]), p) for s in range(t)]
    X, obj, sweeps = _ascend(form, X, lambda G, s: _dual_argmax_rows(G, p), tol, max_sweeps)
    best = int(np.argmax(obj))
    witness = tuple(X[s][best].copy() for s in range(t))
    value = float(form.evaluate([w[None, :] for w in witness])[0])
    return NormEstimate(value, "certified_lower_bound", witness, len(starts), sweeps, tol)


def _sphere_grid(n, resolution):
    """Points of the l_inf unit sphere: each face with a uniform grid of spacing 2/resolution."""
    axis = np.linspace(-1.0, 1.0, resolution + 1)
    pts = []
    for i in range(n):
        others = np.array(list(itertools.product(axis, repeat=n - 1))).reshape(-1, n - 1)
        for sign in (-1.0, 1.0):
            pts.append(np.insert(others, i, sign, axis=1))
    return np.unique(np.concatenate(pts), axis=0)


def _enumerate_last_slot(form, candidates, p, chunk=1 << 16):
    """Max over products of candidate sets (slots 1..t-1) of the dual norm in slot t."""
    q = dual_exponent(p)
    t = form.t
    sizes = [len(c) for c in candidates]
    total = math.prod(sizes)
    best, best_idx = -1.0, None
    for lo in range(0, total, chunk):
        flat = np.arange(lo, min(total, lo + chunk))
        picks = np.unravel_index(flat, sizes)
        X = [candidates[s][picks[s]] for s in range(t - 1)] + [np.zeros((len(flat), form.n))]
        G = form.gradient(X, t - 1)
        vals = _row_norms(G, q)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_idx = float(vals[i]), (flat[i], G[i])
    flat_i, g = best_idx
    picks = np.unravel_index(flat_i, sizes)
    witness = [candidates[s][picks[s]] for s in range(t - 1)]
    last = _dual_argmax_rows(g[None, :], p)[0] if np.any(g) else np.eye(form.n)[0]
    return best, tuple(witness) + (last,)


def multilinear_norm_oracle(A, p, resolution: int | None = None,
                            max_enumeration: int = 1 << 22) -> NormEstimate:
    """Ground truth for small instances.

    Exact regimes: p = inf by sign enumeration, p = 1 (largest entry), and
    t = 2, p = 2 (top singular value).  For n <= 3 a grid over the unit
    spheres gives a certified lower bound and a Lipschitz upper bound.
    """
    _check_p(p)
    form = A if isinstance(A, CooForm) else CooForm.from_form(A)
    t, n = form.t, form.n
    if form.is_zero:
        return _zero_estimate(t, n)
    if p == math.inf and 2 ** (n * (t - 1)) <= max_enumeration:
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
        value, witness = _enumerate_last_slot(form, [signs] * (t - 1), p)
        return NormEstimate(value, "exact", witness)
    if p == 1:
        i = int(np.argmax(np.abs(form.values)))
        witness = []
        for s in range(t):
            e = np.zeros(n)
            e[form.index[i, s]] = 1.0
            witness.append(e)
        witness[0] *= np.sign(form.values[i])
        return NormEstimate(float(abs(form.values[i])), "exact", tuple(witness))
    if t == 2 and p == 2:
        M = np.zeros((n, n))
        np.add.at(M, (form.index[:, 0], form.index[:, 1]), form.values)
        U, svals, Vt = np.linalg.svd(M)
        return NormEstimate(float(svals[0]), "exact", (U[:, 0].copy(), Vt[0].copy()))
    if n <= 3:
        if resolution is None:
            resolution = {1: 1, 2: 128, 3: 8}[n] if t <= 3 else {1: 1, 2: 16, 3: 4}[n]
        grid = _sphere_grid(n, resolution)
        grid = grid / _row_norms(grid, p)[:, None]
        if len(grid) ** (t - 1) > max_enumeration:
            raise UnsupportedRegimeError("grid too large; lower the resolution")
        lower, witness = _enumerate_last_slot(form, [grid] * (t - 1), p)
        h = 2.0 / resolution
        delta = (n - 1) ** (0.0 if p == math.inf else 1.0 / p) * h
        slack = 1.0 - (t - 1) * delta
        upper = lower / slack if slack > 0 else math.inf
        return NormEstimate(lower, "certified_lower_bound", witness, upper=upper)
    raise UnsupportedRegimeError(f"no oracle for t={t}, n={n}, p={p}")


def indicator_seed(n, sets, t):
    """Indicator vectors of ``sets`` scaled to unit l_t norm; None if any set is empty."""
    out = []
    for T in sets:
        members = np.unique(np.asarray(list(T), dtype=np.int64))
        if not len(members):
            return None
        x = np.zeros(n)
        x[members] = len(members) ** (-1.0 / t)
        out.append(x)
    return tuple(out)


def lambda_K(H: Hypergraph, K: Hypergraph, restarts: int = 8, tol: float = DEFAULT_TOL,
             test_sets=(), seed: int = 0, max_sweeps: int = 1000) -> NormEstimate:
    """Estimate of ||A_H - A_K||_{l_t,...,l_t}.

    Every tuple of vertex sets in ``test_sets`` seeds a restart with
    normalized indicators, so the estimate is at least
    |(A_H - A_K)(1_T1, ..., 1_Tt)| / (|T1|...|Tt|)^(1/t) for each of them.
    """
    if H.t != K.t or H.vertex_count != K.vertex_count:
        raise DomainError("H and K differ in uniformity or vertex set")
    if not (H.is_regular and K.is_regular):
        raise DomainError("lambda_K needs regular hypergraphs")
    diff = adjacency_form(H) - adjacency_form(K)
    seeds = [s for s in (indicator_seed(H.vertex_count, T, H.t) for T in test_sets) if s is not None]
    return multilinear_norm(diff, H.t, restarts=restarts, seeds=seeds, tol=tol, seed=seed,
                            max_sweeps=max_sweeps)


def spectral_lambda(M: np.ndarray) -> float:
    """Largest non-principal |eigenvalue| of a symmetric normalized adjacency matrix."""
    n = M.shape[0]
    return float(np.max(np.abs(np.linalg.eigvalsh(M - np.full((n, n), 1.0 / n)))))


def _top_d_rows(G, d):
    """Row-wise maximizer of <g, x> over {-1,0,1}^n vectors with exactly d nonzeros."""
    order = np.argsort(-np.abs(G), axis=1, kind="stable")[:, :d]
    X = np.zeros_like(G)
    rows = np.arange(len(G))[:, None]
    X[rows, order] = np.where(G[rows, order] < 0, -1.0, 1.0)
    return X


def sparse_sign_max(form: CooForm, d, starts: int = 4, seed: int = 0, tol: float = DEFAULT_TOL,
                    max_sweeps: int = 200) -> float:
    """Heuristic max of the form over products of d_s-sparse sign vectors.

    Block ascent from one greedy start (top marginals) and ``starts`` random
    sparse starts; a lower estimate of the true maximum.
    """
    t, n = form.t, form.n
    d = [min(int(ds), n) for ds in d]
    if form.is_zero:
        return 0.0
    absform = CooForm(t, n, form.index, np.abs(form.values))
    ones = [np.ones((1, n)) for _ in range(t)]
    X0 = [_top_d_rows(absform.gradient(ones, s), d[s]) for s in range(t)]
    rng = substream(seed, 0xD1AD)
    X = []
    for s in range(t):
        rand = np.zeros((starts, n))
        for r in range(starts):
            support = rng.choice(n, size=d[s], replace=False)
            rand[r, support] = rng.choice((-1.0, 1.0), size=d[s])
        X.append(np.concatenate([X0[s], rand]))
    _, obj, _ = _ascend(form, X, lambda G, s: _top_d_rows(G, d[s]), tol, max_sweeps)
    return float(obj.max())


def dyadic_upper_bound(A_list, p, trials: int = 16, seed: int = 0, starts: int = 4) -> float:
    """Monte Carlo value of the dyadic-decomposition bound on E||sum eps_i A_i||.

    With R = ceil(log2 n), averages over sign draws the sum over r in [R]^t of
    2^t * max{(sum eps_i A_i)(x) : x[s] sparse sign vector with 2^r_s nonzeros}
    / 2^((r_1+...+r_t)/p).  The inner maxima are heuristic, so this is a
    diagnostic rather than a certificate.
    """
    _check_p(p)
    forms = [A if isinstance(A, CooForm) else CooForm.from_form(A) for A in A_list]
    if not forms:
        raise DomainError("need at least one form")
    t, n = forms[0].t, forms[0].n
    if any(f.t != t or f.n != n for f in forms):
        raise DomainError("forms must share arity and dimension")
    R = max(1, math.ceil(math.log2(n)))
    inv_p = 0.0 if p == math.inf else 1.0 / p
    totals = []
    for trial in range(trials):
        eps = rademacher(substream(seed, trial), len(forms))
        S = CooForm.combine(forms, eps)
        total = 0.0
        for r in itertools.product(range(1, R + 1), repeat=t):
            if S.is_zero:
                break
            m = sparse_sign_max(S, [2**rs for rs in r], starts=starts, seed=seed + trial)
            total += 2**t * m / 2 ** (sum(r) * inv_p)
        totals.append(total)
    return float(np.mean(totals))
