from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from presidential import Predicate, from_delta
from presidential.errors import BudgetError
from presidential.ktw import (approx_S, check_point, expansion_residual, key_quantities, matching_count,
                              mixture_point, pair_index, pair_target, sample_mixture, sum_S, sum_S_terms,
                              vertex_delta, vertex_point)

from oracles import matchings, naive_S


def test_pair_index_is_lexicographic():
    k = 7
    expected = list(combinations(range(k), 2))
    assert [pair_index(i, j, k) for i, j in expected] == list(range(len(expected)))
    assert pair_index(4, 2, k) == pair_index(2, 4, k)


@pytest.mark.parametrize("n,l", [(4, 1), (6, 2), (7, 3), (9, 2), (8, 4)])
def test_matching_count(n, l):
    assert matching_count(n, l) == len(list(matchings(range(n), l)))


def test_vertex_and_mixture_points():
    p = Predicate(7, 3)
    x = p.orbit_representative(1, 2)
    v = vertex_point(x)
    assert v.is_vertex and check_point(p, v)
    assert v.pair(0, 1) == x[0] * x[1]
    y = p.orbit_representative(-1, 6)
    m = mixture_point([(Fraction(1, 3), x), (Fraction(2, 3), y)])
    assert check_point(p, m)
    assert m.b[0] == Fraction(1, 3) - Fraction(2, 3)
    bad = mixture_point([(Fraction(1), tuple(-c for c in x))])
    assert not check_point(p, bad)
    with pytest.raises(ValueError):
        mixture_point([(Fraction(1, 2), x)])


def test_vertex_delta_matches_key_quantities():
    p = Predicate(11, 5)
    for x1, t in p.orbits():
        q = key_quantities(vertex_point(p.orbit_representative(x1, t)), p)
        assert q.Delta == vertex_delta(p, t)
        assert q.E == pair_target(p)
        assert q.alpha == x1 and q.beta == 2 * t - (p.k - 1)


@pytest.mark.parametrize("k,a", [(5, 1), (6, 2), (7, 3), (8, 4), (9, 5)])
@pytest.mark.parametrize("shape", ["S1", "S2", "S3"])
def test_sum_S_vertices_match_naive(k, a, shape):
    p = Predicate(k, a)
    for x1, t in p.orbits():
        v = vertex_point(p.orbit_representative(x1, t))
        for l in range(1, 4):
            if sum_S_terms(k, shape, l) == 0:
                continue
            assert sum_S(v, shape, l) == naive_S(v, shape, l)


@pytest.mark.parametrize("shape", ["S1", "S2", "S3"])
def test_sum_S_mixtures_match_naive(shape):
    p = Predicate(8, 4)
    for seed in range(4):
        pt = sample_mixture(p, 5, np.random.default_rng(seed))
        for l in (1, 2, 3):
            got = sum_S(pt, shape, l)
            ref = float(naive_S(pt, shape, l))
            assert got == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_sum_S_terms_counts():
    k = 8
    for l in (1, 2, 3):
        assert sum_S_terms(k, "S2", l) == len(list(matchings(range(1, k), l)))


def test_budget():
    v = vertex_point(Predicate(40, 20).orbit_representative(1, 20))
    with pytest.raises(BudgetError):
        sum_S(v, "S1", 4, budget=1000)


def test_sample_mixture_deterministic():
    p = Predicate(10, 6)
    a = sample_mixture(p, 6, np.random.default_rng(7))
    b = sample_mixture(p, 6, np.random.default_rng(7))
    assert a.b == b.b and a.bij == b.bij and check_point(p, a)


def test_s2_exact_at_l1():
    p = from_delta(14, Fraction(3, 5))
    for seed in range(3):
        pt = sample_mixture(p, 4, np.random.default_rng(seed))
        assert approx_S(pt, p, 1)["S2_exact"] == 0
    v = vertex_point(p.orbit_representative(1, 7))
    res = approx_S(v, p, 1)
    assert res["S2_exact"] == 0 and res["S1"] == pytest.approx(0, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), support=st.integers(1, 6))
def test_mixtures_stay_in_polytope(seed, support):
    p = Predicate(9, 5)
    pt = sample_mixture(p, support, np.random.default_rng(seed))
    assert check_point(p, pt)
    assert sum(pt.b[i] for i in range(9)) + (p.a - 1) * pt.b[0] >= 1
    q = key_quantities(pt, p)
    assert q.Delta >= min(vertex_delta(p, t) for _, t in p.orbits())


def test_expansion_residual_small_at_vertices():
    p = from_delta(16, Fraction(3, 5))
    for x1, t in p.orbits():
        v = vertex_point(p.orbit_representative(x1, t))
        assert abs(expansion_residual(v, 2)) < 50
