"""Balance system showing bias-only schemes of fixed degree gain nothing.

A distribution over a handful of bias patterns is built so that, at every
odd degree d <= m, the Fourier-weighted sum of f_d over the mixture is
zero.  Everything is exact; residuals are compared with 0, not a tolerance.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .errors import InfeasibleError, PresidentialError, RangeError
from .fourier import FourierTable, exact_table
from .ktw import KtwPoint, check_point, mixture_point
from .predicate import Predicate, from_delta
from .rounding import fmt_frac


@dataclass(frozen=True)
class PointType:
    president_bias: int
    ones: int
    minus_ones: int
    label: str

    def biases(self, k: int) -> tuple:
        rest = k - 1 - self.ones - self.minus_ones
        if rest < 0:
            raise RangeError(f"{self.label} needs {self.ones + self.minus_ones} citizens, k={k}")
        return (self.president_bias,) + (1,) * self.ones + (-1,) * self.minus_ones + (0,) * rest


def _signed_count(ones: int, minus: int, d: int) -> int:
    """sum_j (-1)^j C(minus, j) C(ones, d - j)."""
    if d < 0:
        return 0
    return sum((-1) ** j * math.comb(minus, j) * math.comb(ones, d - j) for j in range(min(minus, d) + 1))


def contribution_coefficient(f: FourierTable, pt: PointType, degree: int, president_sign: int = 1) -> Fraction:
    """Multiplier of f_degree(1,...,1) from one unit of mass on pt.

    president_sign=-1 reproduces the alternative sign for the president
    part at degree >= 3; the default follows the per-coordinate flip rule.
    """
    if degree > f.k:
        raise RangeError(f"degree {degree} exceeds k={f.k}")
    total = f.coeff(False, degree) * _signed_count(pt.ones, pt.minus_ones, degree) if degree <= f.k - 1 else Fraction(0)
    if pt.president_bias:
        s = pt.president_bias * (president_sign if degree >= 3 else 1)
        total += f.coeff(True, degree - 1) * s * _signed_count(pt.ones, pt.minus_ones, degree - 1)
    return total


def standard_types(k: int, m: int) -> list:
    types = [PointType(0, 1, 0, "T0")]
    for a in range(3, m + 1, 2):
        types.append(PointType(0, a - 1, 1, f"T{a}-"))
        types.append(PointType(0, a, 0, f"T{a}+"))
    types.append(PointType(-1, k - 1, 0, "Tfull"))
    return types


def find_witness(p: Predicate, pt: PointType) -> list:
    """Two satisfying assignments averaging to pt's biases, or [x] if pt is a vertex.

    The pair agrees on the support of pt and is opposite everywhere else,
    so zero-bias coordinates average out.
    """
    b = pt.biases(p.k)
    if all(v != 0 for v in b):
        if p.evaluate(b) != 1:
            raise InfeasibleError(f"{pt.label} is a vertex but not satisfying")
        return [(Fraction(1), b)]
    if pt.president_bias != 0:
        raise InfeasibleError(f"no witness rule for {pt.label}")
    fixed = pt.ones - pt.minus_ones
    free = p.k - 1 - pt.ones - pt.minus_ones
    # need |a + F| <= fixed - 1 with F the free-citizen sum of x
    best = None
    for plus in range(free + 1):
        F = 2 * plus - free
        if abs(p.a + F) <= fixed - 1 and (best is None or abs(p.a + F) < abs(p.a + best)):
            best = F
    if best is None:
        raise InfeasibleError(f"no satisfying pair averages to {pt.label} for k={p.k}, a={p.a}")
    plus = (free + best) // 2
    x = list(b)
    x[0] = 1
    start = 1 + pt.ones + pt.minus_ones
    for i in range(free):
        x[start + i] = 1 if i < plus else -1
    y = [v if v2 != 0 else -v for v, v2 in zip(x, b)]
    x, y = tuple(x), tuple(y)
    if p.evaluate(x) != 1 or p.evaluate(y) != 1:
        raise InfeasibleError(f"witness construction for {pt.label} failed")
    return [(Fraction(1, 2), x), (Fraction(1, 2), y)]


def witness_point(p: Predicate, pt: PointType) -> KtwPoint:
    pt_ = mixture_point(find_witness(p, pt))
    if not check_point(p, pt_) or pt_.b != tuple(Fraction(v) for v in pt.biases(p.k)):
        raise InfeasibleError(f"witness for {pt.label} does not reproduce its biases")
    return pt_


@dataclass
class BalanceSystem:
    k: int
    a: int
    m: int
    degrees: list
    types: list
    matrix: dict                 # degree -> list of coefficients aligned with types
    solution: dict               # label -> probability
    table: FourierTable
    witnesses: dict = field(default_factory=dict)
    president_sign: int = 1

    def residuals(self) -> dict:
        return {d: sum(c * self.solution[t.label] for c, t in zip(self.matrix[d], self.types))
                for d in self.degrees}

    def to_json(self) -> dict:
        return {
            "k": self.k, "a": self.a, "m": self.m,
            "sign_rule": "flip" if self.president_sign == 1 else "table",
            "types": [{"label": t.label, "president_bias": t.president_bias, "ones": t.ones,
                       "minus_ones": t.minus_ones} for t in self.types],
            "matrix": {str(d): [fmt_frac(c) for c in row] for d, row in self.matrix.items()},
            "probabilities": {lab: fmt_frac(v) for lab, v in self.solution.items()},
            "residuals": {str(d): fmt_frac(r) for d, r in self.residuals().items()},
            "witnesses": {lab: [{"weight": fmt_frac(w), "x": list(x)} for w, x in mix]
                          for lab, mix in self.witnesses.items()},
        }


def build_and_solve(p: Predicate, m: int, president_sign: int = 1) -> BalanceSystem:
    """Descending-degree triangular solve; T_full has free scale, T0 absorbs degree 1."""
    if m < 1 or m % 2 == 0:
        raise RangeError("m must be a positive odd integer")
    if m > p.k - 1:
        raise RangeError(f"m={m} needs at least {m + 1} variables")
    table = exact_table(p, t_max=m)
    types = standard_types(p.k, m)
    witnesses = {t.label: find_witness(p, t) for t in types}
    for t in types:
        witness_point(p, t)
    degrees = list(range(1, m + 1, 2))
    matrix = {d: [contribution_coefficient(table, t, d, president_sign) for t in types] for d in degrees}
    col = {t.label: i for i, t in enumerate(types)}
    sol = {t.label: None for t in types}
    sol["Tfull"] = Fraction(1)
    for d in reversed(degrees):
        row = matrix[d]
        known = sum(row[col[lab]] * v for lab, v in sol.items() if v is not None)
        pivots = ["T0"] if d == 1 else [f"T{d}-", f"T{d}+"]
        chosen = None
        for lab in pivots:
            c = row[col[lab]]
            if c != 0 and -known / c >= 0:
                chosen = lab
                break
        if chosen is None:
            if known == 0:
                chosen = pivots[0]
            else:
                raise InfeasibleError(f"degree {d} cannot be balanced with nonnegative mass (k={p.k}, a={p.a})")
        sol[chosen] = -known / row[col[chosen]] if known != 0 else Fraction(0)
        for lab in pivots:
            if sol[lab] is None:
                sol[lab] = Fraction(0)
    total = sum(sol.values())
    sol = {lab: v / total for lab, v in sol.items()}
    sys_ = BalanceSystem(p.k, p.a, m, degrees, types, matrix, sol, table, witnesses, president_sign)
    if any(r != 0 for r in sys_.residuals().values()):
        raise InfeasibleError("balance residual is not zero")
    return sys_


def _elementary(signs, n: int) -> list:
    """e_0..e_n of the given values by the product-of-(1 + s z) recurrence."""
    e = [1] + [0] * n
    for s in signs:
        for d in range(n, 0, -1):
            e[d] += s * e[d - 1]
    return e


def expansion_by_degree(sys_: BalanceSystem, max_degree: int) -> dict:
    """Per type, per degree: sum over index sets of Fourier coefficient times sign product.

    Computed from the explicit bias vectors, independently of the binomial
    formulas behind the matrix.
    """
    f = sys_.table
    out = {}
    for t in sys_.types:
        b = t.biases(sys_.k)
        e = _elementary(b[1:], max_degree)
        row = {}
        for d in range(1, max_degree + 1):
            cit = f.coeff(False, d) * e[d] if d <= sys_.k - 1 else Fraction(0)
            pres = f.coeff(True, d - 1) * b[0] * e[d - 1] if b[0] else Fraction(0)
            row[d] = cit + pres
        out[t.label] = row
    return out


def verify_zero_expectation(sys_: BalanceSystem, trials: int = 100, seed: int = 0) -> dict:
    """E over the mixture of the bias-only advantage for random rational f."""
    exp = expansion_by_degree(sys_, sys_.m)
    values = []
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        fvals = {d: Fraction(int(rng.integers(-1000, 1001)), int(rng.integers(1, 1001)))
                 for d in range(1, sys_.m + 1)}
        e = sum(sys_.solution[lab] * sum(fvals[d] * c for d, c in row.items()) for lab, row in exp.items())
        values.append(e)
    nonzero = [i for i, v in enumerate(values) if v != 0]
    return {"trials": trials, "seed": seed, "all_zero": not nonzero, "nonzero_trials": nonzero,
            "max_abs": fmt_frac(max((abs(v) for v in values), default=Fraction(0)))}


def monarchy_check(k: int) -> dict:
    if k < 4:
        raise RangeError("monarchy check needs k >= 4")
    p = Predicate(k, k - 2)
    bad = []
    for x1, t in p.orbits():
        x = p.orbit_representative(x1, t)
        if min(x[1:]) < -x[0]:
            bad.append((x1, t))
    cand = PointType(0, 2, 1, "T3-").biases(k)
    violated = min(cand[1:]) < -cand[0]
    try:
        find_witness(p, PointType(0, 2, 1, "T3-"))
        witness_found = True
    except InfeasibleError:
        witness_found = False
    return {"k": k, "a": k - 2, "vertices_obey_inequality": not bad, "offending_orbits": bad,
            "candidate": list(cand), "candidate_violates": violated, "candidate_witness_found": witness_found,
            "ok": not bad and violated and not witness_found}


def first_feasible_k(delta, m: int, k_values) -> dict:
    """Smallest k (in the given order) where the balance system solves, plus every failure seen."""
    failures = []
    for k in k_values:
        try:
            p = from_delta(k, delta)
        except PresidentialError as exc:   # no valid weight at this k
            failures.append({"k": k, "reason": str(exc)})
            continue
        try:
            s = build_and_solve(p, m)
        except (InfeasibleError, RangeError) as exc:
            failures.append({"k": k, "a": p.a, "reason": str(exc)})
            continue
        return {"m": m, "delta": fmt_frac(Fraction(delta)), "k": k, "a": p.a,
                "full_to_filler": float(s.solution["Tfull"] / s.solution["T0"]), "failures": failures}
    return {"m": m, "delta": fmt_frac(Fraction(delta)), "k": None, "failures": failures}
