import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arithx.errors import DomainError, PreconditionError
from arithx.field_group import FpVec, cyclic, dihedral, product, vector_space
from arithx.hypergraph import (Hypergraph, MultilinearForm, adjacency_form, ap_matrix, ap_steps,
                               cayley_adjacency_matrix, cayley_graph, cayley_hypergraph,
                               coset_representatives, in_solution_set, indicator,
                               permutation_hypergraph, slice_form, sol_generator)


def dense_adjacency(G, q, S):
    """Normalized adjacency tensor straight from the definition: every edge
    contributes one to each of its t! argument orderings."""
    t, m = len(q), G.order
    T = np.zeros((m,) * t)
    for g in S:
        for u in range(m):
            edge = [int(G.op(G.power(u, qj), g[j])) for j, qj in enumerate(q)]
            for sigma in itertools.permutations(range(t)):
                T[tuple(edge[s] for s in sigma)] += 1
    return T / (math.factorial(t) * len(S))


def test_swap_permutation_pair():
    H = permutation_hypergraph([[0, 1], [1, 0]])
    assert H.edge_count(0, 1) == H.edge_count(1, 0) == 2
    assert H.degree == 2


def test_identity_permutation_pair():
    H = permutation_hypergraph([[0, 1], [0, 1]])
    assert H.edge_count(0, 0) == 2
    assert H.edge_count(0, 1) == 0
    assert H.degree == 2


def test_permutation_hypergraph_rejects_non_bijection():
    with pytest.raises(DomainError):
        permutation_hypergraph([[0, 1], [1, 1]])


def test_cayley_graph_examples():
    assert cayley_graph(cyclic(2), [1]).degree == 2
    cube = vector_space(2, 3)
    basis = [FpVec(2, e).index for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    assert cayley_graph(cube, basis).degree == 6


def test_cayley_hypergraph_example_degree():
    H = cayley_hypergraph(cyclic(5), (1, 1, 1), [(0, 1, 2)])
    assert H.degree == 6 and H.is_regular


def test_cayley_hypergraph_rejects_order_condition():
    with pytest.raises(PreconditionError):
        cayley_hypergraph(cyclic(6), (1, 2, 3), [(0, 0, 0)])


GROUPS = [cyclic(7), cyclic(9), vector_space(3, 2), product(cyclic(2), cyclic(5)), dihedral(4)]


@settings(max_examples=40)
@given(st.sampled_from(GROUPS), st.integers(2, 3), st.data())
def test_adjacency_form_matches_dense_definition(G, t, data):
    units = [q for q in range(-3, 4) if q and all(
        np.unique(G.power(G.elements(), q)).size == G.order for _ in [0])]
    q = data.draw(st.lists(st.sampled_from(units), min_size=t, max_size=t))
    S = data.draw(st.lists(st.lists(st.integers(0, G.order - 1), min_size=t, max_size=t),
                           min_size=1, max_size=3))
    H = cayley_hypergraph(G, q, S)
    assert H.degree == math.factorial(t) * len(S)
    A = adjacency_form(H)
    np.testing.assert_allclose(A.to_dense(), dense_adjacency(G, q, S), atol=1e-15)
    # normalized regular forms have every one-slot marginal equal to 1
    for slot in range(t):
        assert np.all(A.marginal_sums(slot) == A.den)
    assert A.is_symmetric()


def test_cayley_matrix_paths_agree():
    G = dihedral(5)
    S = [1, 3, 3, 6]
    M = cayley_adjacency_matrix(G, S)
    A = adjacency_form(cayley_graph(G, S))
    np.testing.assert_allclose(M, A.to_dense(), atol=1e-15)
    np.testing.assert_allclose(M, M.T)


def test_hypergraph_json_roundtrip():
    H = cayley_hypergraph(cyclic(7), (1, 1, 1), [(0, 1, 3), (0, 0, 0)])
    H2 = Hypergraph.from_json(H.to_json())
    assert np.array_equal(H.edges, H2.edges) and np.array_equal(H.multiplicity, H2.multiplicity)
    assert H2.degree == H.degree
    bad = H.to_json()
    bad["degree"] = 5
    with pytest.raises(DomainError):
        Hypergraph.from_json(bad)


def test_union_adds_degrees():
    G = cyclic(7)
    H1 = cayley_hypergraph(G, (1, 1, 1), [(0, 1, 2)])
    H2 = cayley_hypergraph(G, (1, 1, 1), [(0, 2, 4)])
    assert H1.union(H2).degree == H1.degree + H2.degree


def test_irregular_normalization_rejected():
    H = Hypergraph.from_rows(2, 3, [[0, 1]])
    assert not H.is_regular
    with pytest.raises(DomainError):
        adjacency_form(H)


# Multilinear forms


@given(st.integers(2, 3), st.integers(1, 4), st.data())
def test_form_evaluation_matches_einsum(t, n, data):
    entries = data.draw(st.dictionaries(
        st.tuples(*[st.integers(0, n - 1)] * t),
        st.fractions(min_value=-3, max_value=3, max_denominator=6), max_size=8))
    A = MultilinearForm.from_entries(t, n, entries)
    xs = [data.draw(st.lists(st.integers(-4, 4), min_size=n, max_size=n)) for _ in range(t)]
    expected = sum((v * math.prod(xs[s][key[s]] for s in range(t)) for key, v in entries.items()),
                   Fraction(0))
    assert A.evaluate(*[np.array(x) for x in xs]) == expected
    assert MultilinearForm.from_json(A.to_json()) == A
    dense = np.einsum(A.to_dense(), list(range(t)), *[v for s, x in enumerate(xs) for v in (np.array(x, float), [s])])
    assert math.isclose(float(expected), float(dense), abs_tol=1e-9)


def test_form_arithmetic():
    A = MultilinearForm.from_entries(2, 2, {(0, 1): Fraction(1, 2), (1, 1): Fraction(1, 3)})
    B = MultilinearForm.from_entries(2, 2, {(0, 1): Fraction(1, 2)})
    assert (A - B).entries == {(1, 1): Fraction(1, 3)}
    assert (A - A).is_zero()
    assert (A * 6).entries == {(0, 1): 3, (1, 1): 2}
    assert (-A).abs() == A
    assert (A / 2).evaluate(np.ones(2, int), np.ones(2, int)) == Fraction(5, 12)


def test_evaluation_survives_int64_overflow():
    big = 2**40
    A = MultilinearForm.from_entries(3, 1, {(0, 0, 0): big})
    x = np.array([big])
    assert A.evaluate(x, x, x) == big**4


def test_indicator():
    assert indicator(5, [0, 3]).tolist() == [1, 0, 0, 1, 0]


# Translation-invariant systems


def test_sol_ap_example_both_paths():
    G = cyclic(5)
    C = [[1, -2, 1]]
    fast = sol_generator(C, G)
    slow = sol_generator(C, G, fast_path=False)
    assert len(fast) == 25
    assert np.array_equal(fast, slow)


@pytest.mark.parametrize("G, q", [(cyclic(5), (1, 1, 1)), (cyclic(7), (1, 2, 3)),
                                  (vector_space(3, 2), (1, 1, 1)), (vector_space(5, 2), (1, 2, 3)),
                                  (cyclic(11), (2, 3, 4))], ids=str)
def test_coset_representatives_partition_sol(G, q):
    C = ap_matrix(3)
    sol = {tuple(h) for h in sol_generator(C, G).tolist()}
    for fast in (True, False):
        reps = coset_representatives(C, q, G, fast_path=fast)
        assert len(reps) * G.order == len(sol)
        orbits = set()
        for h in reps:
            orbit = frozenset(tuple(int(G.op(G.power(u, qj), h[j])) for j, qj in enumerate(q))
                              for u in range(G.order))
            assert orbit <= sol
            orbits.add(orbit)
        assert len(orbits) == len(reps)
        assert frozenset().union(*orbits) == sol


def test_coset_representatives_needs_cq_zero():
    with pytest.raises(PreconditionError):
        coset_representatives(ap_matrix(3), (1, 1, 2), cyclic(7))


def test_coset_reps_give_same_hypergraph_either_path():
    G, q = cyclic(7), (1, 2, 3)
    fast = cayley_hypergraph(G, q, coset_representatives(ap_matrix(3), q, G))
    slow = cayley_hypergraph(G, q, coset_representatives(ap_matrix(3), q, G, fast_path=False))
    assert adjacency_form(fast) == adjacency_form(slow)


def test_general_system_membership():
    G = cyclic(6)
    C = [[1, 1, -2]]
    sol = sol_generator(C, G)
    assert np.all(in_solution_set(C, G, sol))
    assert len(sol) == 36
    assert not in_solution_set(C, G, [[1, 0, 0]])[0]


def test_ap_steps_and_slice():
    G = vector_space(3, 2)
    steps = ap_steps(G, [FpVec(3, (1, 2)).index], 3)
    assert steps == [(0, FpVec(3, (1, 2)).index, FpVec(3, (2, 1)).index)]
    # each line {u, u+y, u+2y} arises from all three of its points
    A = slice_form(G, (1, 1, 1), steps[0])
    assert set(A.entries.values()) == {Fraction(1, 2)}
    assert A.nnz == 3 * 6


def test_char_p_rejects_q_equal_p():
    with pytest.raises(PreconditionError, match="q\\[2\\]"):
        coset_representatives(ap_matrix(3), (1, 2, 3), vector_space(3, 2))
