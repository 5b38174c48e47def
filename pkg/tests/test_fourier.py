from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from presidential import Predicate
from presidential.errors import RangeError
from presidential.fourier import (asymptotic_citizen_coeff, brute_force_coeff, brute_force_table, exact_table,
                                  alternating_prefix_identity, weighted_binomial_identities, verify_identities)


def valid_pairs(k_lo, k_hi):
    return [(k, a) for k in range(k_lo, k_hi + 1) for a in range(1, k - 1) if (a + k) % 2 == 0]


def test_small_example():
    t = exact_table(Predicate(4, 2))
    assert t.president == Fraction(3, 4)
    assert t.coeff(False, 1) == Fraction(1, 4)
    assert t.parseval() == 1


@pytest.mark.parametrize("k,a", valid_pairs(4, 10))
def test_exact_matches_brute_force(k, a):
    p = Predicate(k, a)
    ex, bf = exact_table(p), brute_force_table(p)
    assert ex.president == bf.president
    assert ex.citizens == bf.citizens
    assert ex.mixed == bf.mixed
    assert ex.parseval() == 1


def test_single_subset_oracle():
    p = Predicate(9, 5)
    t = exact_table(p)
    assert brute_force_coeff(p, [1]) == t.president
    assert brute_force_coeff(p, [3, 5, 7]) == t.coeff(False, 3)
    assert brute_force_coeff(p, [1, 2, 9]) == t.coeff(True, 2)
    # even sizes vanish
    assert brute_force_coeff(p, [2, 3]) == 0
    assert brute_force_coeff(p, [1, 4, 5, 6]) == 0
    assert t.coeff(False, 2) == 0 and t.coeff(True, 1) == 0


def test_brute_force_cap():
    with pytest.raises(RangeError):
        brute_force_coeff(Predicate(16, 8), [1])


def test_truncated_table():
    t = exact_table(Predicate(30, 16), t_max=5)
    assert set(t.citizens) == {1, 3, 5} and set(t.mixed) == {2, 4}
    with pytest.raises(RangeError):
        exact_table(Predicate(10, 6), t_max=10)


def test_president_dominates_citizens():
    t = exact_table(Predicate(40, 20), t_max=3)
    assert t.president > 100 * t.coeff(False, 1) > 0


def test_asymptotic_relative_error_shrinks():
    errs = []
    for k in (20, 40, 60):
        p = Predicate(k, k // 2 if (k // 2 + k) % 2 == 0 else k // 2 + 1)
        exact = exact_table(p, t_max=5).coeff(False, 5)
        approx = asymptotic_citizen_coeff(k, p.delta, 5)
        errs.append(abs(approx - float(exact)) / abs(float(exact)))
    assert errs[0] > errs[1] > errs[2]


def test_identities():
    assert alternating_prefix_identity(5, 2) and alternating_prefix_identity(1, 0)
    assert weighted_binomial_identities(2, 3, 4) == (True, True)
    rep = verify_identities(200, seed=3)
    assert rep["failures"] == {"alternating": 0, "weighted_first": 0, "weighted_second": 0}


@settings(max_examples=50, deadline=None)
@given(t=st.integers(1, 40), l=st.integers(0, 40))
def test_alternating_prefix_identity_property(t, l):
    assert alternating_prefix_identity(t, l)


@settings(max_examples=30, deadline=None)
@given(a=st.fractions(min_value=-5, max_value=5, max_denominator=7),
       b=st.fractions(min_value=-5, max_value=5, max_denominator=7), k=st.integers(2, 10))
def test_weighted_binomial_identities_property(a, b, k):
    assert weighted_binomial_identities(a, b, k) == (True, True)
