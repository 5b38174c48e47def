"""Slow, obviously-correct reference computations used only by the tests."""
from fractions import Fraction
from itertools import combinations, product


def predicate_value(a, x):
    s = a * x[0] + sum(x[1:])
    return 1 if s > 0 else -1


def satisfying(k, a):
    return [x for x in product((1, -1), repeat=k) if predicate_value(a, x) == 1]


def matchings(vs, l):
    """All sets of l disjoint pairs drawn from vs, each set produced once."""
    vs = list(vs)
    if l == 0:
        yield ()
        return
    if len(vs) < 2 * l:
        return
    first, rest = vs[0], vs[1:]
    yield from matchings(rest, l)
    for j in rest:
        others = [x for x in rest if x != j]
        for m in matchings(others, l - 1):
            yield ((first, j),) + m


def naive_S(point, shape, l):
    k = point.k
    cit = range(1, k)
    b, P = point.b, point.pair
    tot = 0
    if shape == "S1":
        for i in cit:
            for m in matchings([c for c in cit if c != i], l):
                term = b[i]
                for u, v in m:
                    term *= P(u, v)
                tot += term
    elif shape == "S2":
        for m in matchings(list(cit), l):
            term = b[0]
            for u, v in m:
                term *= P(u, v)
            tot += term
    elif shape == "S3":
        for s in cit:
            for q in cit:
                if q == s:
                    continue
                for m in matchings([c for c in cit if c not in (s, q)], l - 1):
                    term = b[s] * P(0, q)
                    for u, v in m:
                        term *= P(u, v)
                    tot += term
    return tot


def naive_scheme_value(s, x):
    """sum over odd index sets of c_|I| P_I prod_{i in I} x_i by explicit subset enumeration.

    The coefficient of a monomial of degree 2l+1 is c1 for l = 0 and c_odd[l]
    times the number of ways the set splits into a singleton and l pairs.
    """
    from presidential.rounding import odd_multiplicity
    k = len(x)
    total = Fraction(0)
    for size in range(1, k + 1, 2):
        l = (size - 1) // 2
        if l == 0:
            c = s.c1
        elif l in s.c_odd:
            c = s.c_odd[l] * odd_multiplicity(l)
        else:
            continue
        for I in combinations(range(k), size):
            pres = 0 in I
            t = size - 1 if pres else size
            coeff = s.table.coeff(pres, t)
            prod = 1
            for i in I:
                prod *= x[i]
            total += c * coeff * prod
    return total
