import csv
import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arithx.errors import DomainError, PreconditionError
from arithx.field_group import cyclic
from arithx.hypergraph import MultilinearForm, cayley_adjacency_matrix, slice_form
from arithx.tensor_lab import (PlaneSubstochasticForm, centered_deviation, deviation_csv,
                               is_plane_substochastic, matrix_deviation, maurey_sparsify,
                               rademacher_deviation, random_sparse_sign, sigma, uniform_form)


def slices(m, count, seed, t=3):
    rng = np.random.default_rng(seed)
    G = cyclic(m)
    return [slice_form(G, (1,) * t, tuple(int(v) for v in rng.integers(0, m, t))) for _ in range(count)]


def test_uniform_form_is_plane_stochastic():
    ok, worst = is_plane_substochastic(uniform_form(3, 4))
    assert ok and worst == 1


def test_slice_forms_are_plane_substochastic():
    for A in slices(9, 10, 0):
        assert is_plane_substochastic(A) == (True, Fraction(1))


def test_doubly_stochastic_matrix_passes():
    # rational mixture of permutation matrices
    perms = [[0, 1, 2], [1, 2, 0], [2, 0, 1]]
    weights = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]
    entries = {}
    for perm, w in zip(perms, weights):
        for i, j in enumerate(perm):
            entries[(i, j)] = entries.get((i, j), 0) + w
    ok, worst = is_plane_substochastic(MultilinearForm.from_entries(2, 3, entries))
    assert ok and worst == 1


def test_violations_are_reported_exactly():
    A = MultilinearForm.from_entries(2, 2, {(0, 0): Fraction(2, 3), (0, 1): Fraction(-1, 2)})
    assert is_plane_substochastic(A) == (False, Fraction(7, 6))
    with pytest.raises(PreconditionError):
        PlaneSubstochasticForm.certify(A)


@given(st.integers(2, 10**4), st.integers(3, 6))
def test_sigma_special_exponents(n, t):
    L = math.log(n) ** (t + 0.5)
    assert sigma(2, t, n) == pytest.approx(L)
    assert sigma(t, t, n) == pytest.approx(n ** (0.5 - 1 / (2 * t)) * L)
    assert sigma(math.inf, t, n) == pytest.approx(n ** (1.5 - 1 / (2 * t)) * L)


def test_sigma_domain():
    with pytest.raises(DomainError):
        sigma(3, 2, 10)
    with pytest.raises(DomainError):
        sigma(3, 3, 1)


def test_single_sign_gives_the_norm():
    # ||J / n^2||_{l_2,l_2,l_2} = n^(1 - 3/2) for n = 4
    exp = rademacher_deviation([uniform_form(3, 4)], 2, trials=5, seed=1)
    assert exp.values == pytest.approx([0.5] * 5, abs=1e-9)


def test_equal_forms_have_zero_centered_deviation():
    A = slices(7, 1, 3)[0]
    for mean in ("exact", "empirical"):
        exp = centered_deviation([A] * 5, k=4, p=3, trials=4, seed=0, mean=mean)
        assert exp.values == [0.0] * 4 and exp.centering == mean


def test_deviation_rejects_non_substochastic():
    bad = MultilinearForm.from_entries(3, 2, {(0, 0, 0): 2})
    with pytest.raises(PreconditionError):
        rademacher_deviation([bad], 3, 2, 0)


def test_deviation_shrinks_with_k():
    pop = slices(8, 32, 5)
    small = centered_deviation(pop, 4, 3, trials=30, seed=2)
    large = centered_deviation(pop, 16, 3, trials=30, seed=2)
    se = math.hypot(small.std, large.std) / math.sqrt(30)
    assert large.mean <= small.mean + 2 * se


def test_deviation_is_reproducible_and_serializes():
    forms = slices(8, 6, 1)
    a = rademacher_deviation(forms, 3, trials=4, seed=11)
    b = rademacher_deviation(forms, 3, trials=4, seed=11)
    assert a.values == b.values
    data = a.to_json()
    assert data["summary"]["mean"] == pytest.approx(np.mean(a.values))
    rows = list(csv.DictReader(io.StringIO(deviation_csv([a, b]))))
    assert list(rows[0]) == ["k", "n", "t", "p", "mean", "median", "q90", "sigma", "ratio"]
    assert float(rows[0]["ratio"]) == pytest.approx(a.mean * math.sqrt(6) / sigma(3, 3, 8))


def test_matrix_deviation_examples():
    n = 5
    J = np.full((n, n), 1.0 / n)
    assert matrix_deviation([J] * 3, 4, 3, 0).values == pytest.approx([0.0] * 3, abs=1e-14)
    G = cyclic(n)
    mats = [cayley_adjacency_matrix(G, [g]) for g in range(n)]
    exp = matrix_deviation(mats, 1, 6, seed=2, eps_levels=[0.5])
    allowed = {round(float(np.linalg.norm(M - J, 2)), 12) for M in mats}
    assert {round(v, 12) for v in exp.values} <= allowed
    assert set(exp.tail_frequencies()) == {0.5}
    with pytest.raises(PreconditionError):
        matrix_deviation([2 * np.eye(3)], 1, 1, 0)


def test_maurey_rejects_small_eta():
    x = [np.array([1, 0, -1, 0])] * 3
    with pytest.raises(PreconditionError):
        maurey_sparsify(x, 0.5, slices(4, 1, 0), 10, 0)
    with pytest.raises(PreconditionError):
        maurey_sparsify([np.array([2, 0, 0, 0])] * 3, 1, slices(4, 1, 0), 10, 0)


def test_maurey_without_compression_stays_on_support():
    rng = np.random.default_rng(0)
    x = [random_sparse_sign(8, 3, rng) for _ in range(3)]
    rep = maurey_sparsify(x, 1.0, slices(8, 2, 1), 500, 0, keep_samples=True)
    assert rep.c == (3, 3, 3)
    for s in range(3):
        off = rep.tuples[s][:, x[s] == 0]
        assert not np.any(off)
        # each coordinate carries the sign of x
        assert np.all(rep.tuples[s] * x[s] >= 0)


@settings(max_examples=15)
@given(st.integers(0, 10**6), st.sampled_from([1.0, 2.0, 4.0]))
def test_maurey_statistics(seed, eta):
    rng = np.random.default_rng(seed)
    d = rng.integers(1, 9, size=3)
    x = [random_sparse_sign(8, int(ds), rng) for ds in d]
    rep = maurey_sparsify(x, eta, slices(8, 3, seed), 3000, seed)
    assert all(v <= rep.variance_bound for v in rep.variances)
    assert rep.net_count <= rep.net_count_bound
    for e in rep.exact:
        assert abs(e) <= min(d)


@settings(max_examples=40)
@given(st.integers(0, 10**6), st.integers(1, 8), st.integers(1, 8), st.integers(1, 8))
def test_plane_substochastic_forms_are_bounded_by_min_sparsity(seed, d1, d2, d3):
    rng = np.random.default_rng(seed)
    A = slices(8, 1, seed)[0]
    x = [random_sparse_sign(8, d, rng) for d in (d1, d2, d3)]
    assert abs(A.evaluate(*x)) <= min(d1, d2, d3)
