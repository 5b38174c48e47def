from fractions import Fraction

import pytest

from presidential import Predicate, from_delta
from presidential.errors import InfeasibleError, RangeError
from presidential.fourier import exact_table
from presidential.ktw import check_point
from presidential.nopairwise import (PointType, build_and_solve, contribution_coefficient, expansion_by_degree,
                                     find_witness, first_feasible_k, monarchy_check, standard_types,
                                     verify_zero_expectation, witness_point)


@pytest.fixture(scope="module")
def table30():
    return exact_table(Predicate(30, 16), t_max=5)


def test_table_entries(table30):
    c3 = table30.coeff(False, 3)
    assert contribution_coefficient(table30, PointType(0, 4, 1, "x"), 3) == -2 * c3
    assert contribution_coefficient(table30, PointType(0, 2, 1, "x"), 3) == -c3
    assert contribution_coefficient(table30, PointType(0, 1, 0, "x"), 3) == 0
    full = PointType(-1, 29, 0, "full")
    assert contribution_coefficient(table30, full, 1) == -table30.president + 29 * table30.coeff(False, 1)
    # flip rule: the president's -1 negates the mixed term at degree 3
    assert contribution_coefficient(table30, full, 3) == (-406 * table30.coeff(True, 2) + 3654 * c3)
    assert contribution_coefficient(table30, full, 3, president_sign=-1) == (406 * table30.coeff(True, 2)
                                                                            + 3654 * c3)


def test_even_degrees_vanish(table30):
    for t in standard_types(30, 5):
        for d in (2, 4):
            assert contribution_coefficient(table30, t, d) == 0


def test_witnesses_are_valid():
    p = Predicate(30, 20)
    for t in standard_types(30, 5):
        pt = witness_point(p, t)
        assert check_point(p, pt)
        assert pt.b == tuple(Fraction(v) for v in t.biases(30))
        assert all(p.evaluate(x) == 1 for _, x in find_witness(p, t))


def test_solve_small_feasible_cell():
    sys_ = build_and_solve(Predicate(30, 20), 3)
    assert all(r == 0 for r in sys_.residuals().values())
    assert sum(sys_.solution.values()) == 1
    assert all(v >= 0 for v in sys_.solution.values())
    assert sys_.solution["Tfull"] < sys_.solution["T0"]


def test_matrix_matches_independent_expansion():
    sys_ = build_and_solve(Predicate(30, 26), 5)
    exp = expansion_by_degree(sys_, 5)
    for d in sys_.degrees:
        for t, c in zip(sys_.types, sys_.matrix[d]):
            assert exp[t.label][d] == c
    for t in sys_.types:
        assert exp[t.label][2] == 0 and exp[t.label][4] == 0


def test_zero_expectation():
    sys_ = build_and_solve(Predicate(30, 20), 3)
    rep = verify_zero_expectation(sys_, trials=30, seed=4)
    assert rep["all_zero"] and rep["max_abs"] == "0/1"


def test_infeasible_small_k():
    with pytest.raises(InfeasibleError):
        build_and_solve(Predicate(10, 6), 3)
    with pytest.raises(RangeError):
        build_and_solve(Predicate(10, 6), 4)


def test_monarchy_has_no_witness():
    with pytest.raises(InfeasibleError):
        find_witness(Predicate(12, 10), PointType(0, 2, 1, "T3-"))
    for k in range(4, 13):
        rep = monarchy_check(k)
        assert rep["ok"] and rep["candidate_violates"] and rep["vertices_obey_inequality"]


def test_first_feasible_k_reports_failures():
    rep = first_feasible_k(Fraction(1, 2), 3, range(30, 80, 10))
    assert rep["k"] == 70
    assert [f["k"] for f in rep["failures"]] == [30, 40, 50, 60]


def test_json_shape():
    js = build_and_solve(Predicate(30, 20), 3).to_json()
    assert set(js["probabilities"]) == {"T0", "T3-", "T3+", "Tfull"}
    assert all(v == "0/1" for v in js["residuals"].values())
