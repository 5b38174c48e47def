from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from presidential import Predicate
from presidential.certify import vertex_sweep
from presidential.errors import ParamError
from presidential.instance import (Instance, constraint_point, eps_curve, evaluate_instance, generate,
                                   repair_literals)
from presidential.rounding import build_scheme, cubic_h


def test_generate_deterministic_and_planted():
    p = Predicate(10, 6)
    a = generate(p, 40, 100, 0.0, seed=5)
    b = generate(p, 40, 100, 0.0, seed=5)
    assert a == b
    assert a.planted_satisfied() == 100
    for vs, _ in a.constraints:
        assert len(set(vs)) == 10
    assert Instance.from_json(a.to_json()) == a


def test_corruption_count():
    p = Predicate(10, 6)
    inst = generate(p, 40, 200, 0.1, seed=1)
    assert inst.planted_satisfied() >= 180
    clean = generate(p, 40, 200, 0.0, seed=1)
    assert clean.planted == inst.planted


def test_bad_parameters():
    with pytest.raises(ParamError):
        generate(Predicate(10, 6), 5, 10)
    with pytest.raises(ParamError):
        generate(Predicate(10, 6), 20, 10, eps=1.5)


def test_repair_examples():
    p = Predicate(9, 5)
    w = (-1, 1, 1, 1, 1, 1, 1, -1, -1)
    assert p.margin(-1, 6) == -1
    r = repair_literals(p, w)
    assert p.margin(r[0], sum(v == 1 for v in r[1:])) == 1
    assert sum(x != y for x, y in zip(w, r)) == 1 and r[7] == 1   # lowest-index citizen
    assert repair_literals(p, w) == r
    # far below the threshold the president flip is cheaper
    w = (-1,) + (-1,) * 8
    r = repair_literals(p, w)
    assert r[0] == 1 and sum(x != y for x, y in zip(w, r)) == 3


def _min_flips(p, w):
    minus = [i for i, v in enumerate(w) if v == -1]
    for n in range(len(minus) + 1):
        for idx in combinations(minus, n):
            x = list(w)
            for i in idx:
                x[i] = 1
            if p.evaluate(x) == 1:
                return n
    raise AssertionError


@settings(max_examples=80, deadline=None)
@given(bits=st.lists(st.sampled_from([1, -1]), min_size=9, max_size=9), a=st.sampled_from([1, 3, 5, 7]))
def test_repair_is_minimal(bits, a):
    p = Predicate(9, a)
    r = repair_literals(p, bits)
    assert p.evaluate(r) == 1
    assert sum(x != y for x, y in zip(bits, r)) == _min_flips(p, bits)
    assert all(y == 1 for x, y in zip(bits, r) if x != y)


def test_evaluate_instance_respects_vertex_minimum():
    p = Predicate(10, 6)
    s = build_scheme(p, cubic_h())
    inst = generate(p, 50, 300, 0.0, seed=2)
    rep = evaluate_instance(inst, s)
    assert rep["repaired"] == 0 and rep["planted_satisfied_fraction"] == 1
    assert rep["min_V"] >= float(vertex_sweep(s)["min_value"]) - 1e-9
    assert "caveat" in rep
    for i in range(20):
        pt = constraint_point(inst, i)
        assert p.evaluate(pt.b) == 1


def test_skip_policy_and_curve():
    p = Predicate(10, 6)
    s = build_scheme(p, cubic_h())
    inst = generate(p, 50, 200, 0.5, seed=3)
    rep = evaluate_instance(inst, s, repair="skip")
    assert rep["skipped"] > 0 and rep["evaluated"] + rep["skipped"] == 200
    rows = eps_curve(p, s, 50, 100, [0.0, 0.05, 0.1], seed=1)
    assert [r["eps"] for r in rows] == [0.0, 0.05, 0.1]
    assert rows[0]["planted_satisfied_fraction"] == 1
