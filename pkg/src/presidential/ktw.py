"""Points of the local polytope and the symmetric sums over them.

A point carries first-order biases b_i and pairwise biases b_ij (i < j, in
lexicographic order).  Vertices are satisfying assignments; mixtures are
rational convex combinations of vertices with the pairwise entries set to
the mixture's second moments.

Indices are 0-based in code: index 0 is the president, 1..k-1 the citizens.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
import math

import numpy as np

from .errors import BudgetError, RangeError
from .predicate import Predicate

MAX_MATCHING_ROWS = 4_000_000


def pair_index(i: int, j: int, k: int) -> int:
    """Position of (i, j), i < j, in the lexicographic pair list."""
    if i > j:
        i, j = j, i
    return i * (2 * k - i - 1) // 2 + (j - i - 1)


@dataclass
class KtwPoint:
    k: int
    b: tuple
    bij: tuple
    provenance: dict = field(default_factory=dict)

    @property
    def is_vertex(self) -> bool:
        return self.provenance.get("type") == "vertex"

    @property
    def is_exact(self) -> bool:
        return all(isinstance(x, (int, Fraction)) for x in self.b)

    def pair(self, i: int, j: int):
        return self.bij[pair_index(i, j, self.k)]

    def arrays(self):
        """(b1, citizen biases, citizen pair matrix, president pair vector).

        Integer dtype for vertices so downstream sums stay exact.
        """
        k = self.k
        dtype = np.int64 if self.is_vertex else np.float64
        conv = int if self.is_vertex else float
        b1 = conv(self.b[0])
        bc = np.array([conv(x) for x in self.b[1:]], dtype=dtype)
        W = np.zeros((k - 1, k - 1), dtype=dtype)
        y = np.zeros(k - 1, dtype=dtype)
        pos = 0
        for i in range(k):
            for j in range(i + 1, k):
                val = conv(self.bij[pos])
                pos += 1
                if i == 0:
                    y[j - 1] = val
                else:
                    W[i - 1, j - 1] = val
                    W[j - 1, i - 1] = val
        return b1, bc, W, y


def vertex_point(x) -> KtwPoint:
    x = tuple(int(v) for v in x)
    if any(v not in (1, -1) for v in x):
        raise ValueError("vertex coordinates must be +-1")
    k = len(x)
    bij = tuple(x[i] * x[j] for i in range(k) for j in range(i + 1, k))
    return KtwPoint(k, x, bij, {"type": "vertex", "assignment": list(x)})


def mixture_point(members) -> KtwPoint:
    """Exact point for a list of (weight, assignment) pairs with weights summing to 1."""
    members = [(Fraction(w), tuple(int(v) for v in x)) for w, x in members]
    if not members:
        raise ValueError("empty mixture")
    if any(w < 0 for w, _ in members) or sum(w for w, _ in members) != 1:
        raise ValueError("mixture weights must be nonnegative and sum to 1")
    k = len(members[0][1])
    b = [Fraction(0)] * k
    bij = [Fraction(0)] * (k * (k - 1) // 2)
    for w, x in members:
        for i in range(k):
            b[i] += w * x[i]
        pos = 0
        for i in range(k):
            for j in range(i + 1, k):
                bij[pos] += w * x[i] * x[j]
                pos += 1
    prov = {"type": "mixture", "members": [(w, list(x)) for w, x in members]}
    return KtwPoint(k, tuple(b), tuple(bij), prov)


def random_satisfying(p: Predicate, rng) -> tuple:
    """Uniform satisfying assignment: negate a uniform point when it fails."""
    x = rng.choice(np.array([1, -1]), size=p.k)
    if p.evaluate(x) < 0:
        x = -x
    return tuple(int(v) for v in x)


def sample_mixture(p: Predicate, support_size: int, rng) -> KtwPoint:
    """Dirichlet(1) mixture over uniformly drawn satisfying assignments."""
    if support_size < 1:
        raise ValueError("support_size must be positive")
    gammas = rng.gamma(1.0, size=support_size)
    weights = {}
    for g in gammas:
        x = random_satisfying(p, rng)
        weights[x] = weights.get(x, Fraction(0)) + Fraction(float(g))
    total = sum(weights.values())
    return mixture_point([(w / total, x) for x, w in weights.items()])


def check_point(p: Predicate, point: KtwPoint) -> bool:
    """Exact membership test through the stored provenance."""
    prov = point.provenance
    if prov.get("type") == "vertex":
        x = tuple(prov["assignment"])
        return p.evaluate(x) == 1 and vertex_point(x).b == tuple(point.b)
    if prov.get("type") == "mixture":
        if any(p.evaluate(x) != 1 for _, x in prov["members"]):
            return False
        ref = mixture_point(prov["members"])
        return ref.b == tuple(point.b) and ref.bij == tuple(point.bij)
    return False


@dataclass
class KeyQuantities:
    alpha: object
    beta: object
    E: Fraction
    S_pair: object
    Delta: object


def pair_target(p: Predicate) -> Fraction:
    """delta^2 k^2 / 2 - k / 2 + 1."""
    return Fraction(p.a * p.a - p.k + 2, 2)


def key_quantities(point: KtwPoint, p: Predicate) -> KeyQuantities:
    if point.k != p.k:
        raise ValueError("point and predicate arity differ")
    k = p.k
    alpha = point.b[0]
    beta = sum(point.b[1:])
    s_pair = sum(point.bij[pair_index(i, j, k)] for i in range(1, k) for j in range(i + 1, k))
    E = pair_target(p)
    if E == 0:
        raise RangeError(f"pair target E vanishes for k={k}, a={p.a}")
    return KeyQuantities(alpha, beta, E, s_pair, (s_pair - E) / E)


def vertex_delta(p: Predicate, t: int) -> Fraction:
    """Delta at any vertex with t citizens at +1."""
    num, den = vertex_delta_parts(p.k, p.a, t)
    return Fraction(num, den)


def vertex_delta_parts(k: int, a: int, t: int):
    """Integer numerator and denominator of the vertex Delta (delta*k = a)."""
    return 4 * t * t - 4 * (k - 1) * t + k * k - a * a - 2 * k, a * a - k + 2


# -- symmetric sums -------------------------------------------------------

@lru_cache(maxsize=None)
def _pairing_patterns(m: int):
    """All perfect matchings of range(m) as tuples of pairs."""
    if m == 0:
        return ((),)
    out = []
    for j in range(1, m):
        rest = [x for x in range(1, m) if x != j]
        for sub in _pairing_patterns(m - 2):
            out.append(((0, j),) + tuple((rest[a], rest[b]) for a, b in sub))
    return tuple(out)


def matching_count(n: int, l: int) -> int:
    if 2 * l > n:
        return 0
    return math.comb(n, 2 * l) * math.factorial(2 * l) // (2 ** l * math.factorial(l))


@lru_cache(maxsize=16)
def _matchings(n: int, l: int) -> np.ndarray:
    """Every l-matching of range(n); row = (u1, v1, ..., ul, vl)."""
    if l == 0:
        return np.zeros((1, 0), dtype=np.int64)
    if 2 * l > n:
        return np.zeros((0, 2 * l), dtype=np.int64)
    combos = np.array(list(combinations(range(n), 2 * l)), dtype=np.int64)
    blocks = []
    for pattern in _pairing_patterns(2 * l):
        cols = [c for pr in pattern for c in pr]
        blocks.append(combos[:, cols])
    return np.concatenate(blocks, axis=0)


def _matching_products(n: int, l: int, W, budget: int):
    if matching_count(n, l) > budget:
        raise BudgetError(f"{matching_count(n, l)} matchings of size {l} on {n} vertices exceed budget {budget}")
    rows = _matchings(n, l)
    prods = np.ones(len(rows), dtype=W.dtype)
    for j in range(l):
        prods = prods * W[rows[:, 2 * j], rows[:, 2 * j + 1]]
    return rows, prods


def _to_scalar(x):
    return int(x) if isinstance(x, np.integer) else float(x)


def sum_S(point: KtwPoint, shape: str, l: int, budget: int = MAX_MATCHING_ROWS):
    """Distinct-image symmetric sums.

    S1: citizen singleton times l disjoint citizen pairs.
    S2: president bias times l disjoint citizen pairs.
    S3: citizen singleton times a president-citizen pair times l-1 disjoint
        citizen pairs.
    All indices in a term are distinct.  Exact for vertices.
    """
    if l < 1:
        raise ValueError("l must be at least 1")
    b1, bc, W, y = point.arrays()
    n = point.k - 1
    if shape == "S2":
        _, prods = _matching_products(n, l, W, budget)
        return _to_scalar(prods.sum()) * b1
    if shape == "S1":
        rows, prods = _matching_products(n, l, W, budget)
        total = prods.sum()
        touch = np.zeros(n, dtype=prods.dtype)
        np.add.at(touch, rows.ravel(), np.repeat(prods, 2 * l))
        return _to_scalar((bc * (total - touch)).sum())
    if shape == "S3":
        rows, prods = _matching_products(n, l - 1, W, budget)
        total = prods.sum()
        touch = np.zeros(n, dtype=prods.dtype)
        both = np.zeros((n, n), dtype=prods.dtype)
        if l > 1:
            np.add.at(touch, rows.ravel(), np.repeat(prods, 2 * l - 2))
            for c1, c2 in combinations(range(2 * l - 2), 2):
                np.add.at(both, (rows[:, c1], rows[:, c2]), prods)
            both = both + both.T
        # avoid(s, p) = total - touch[s] - touch[p] + both[s, p] for s != p
        avoid = total - touch[:, None] - touch[None, :] + both
        np.fill_diagonal(avoid, 0)
        return _to_scalar(bc @ avoid @ y)
    raise ValueError(f"unknown shape {shape!r}")


def sum_S_terms(k: int, shape: str, l: int) -> int:
    """Number of terms in a symmetric sum."""
    n = k - 1
    if shape == "S1":
        return n * matching_count(n - 1, l)
    if shape == "S2":
        return matching_count(n, l)
    if shape == "S3":
        return n * (n - 1) * matching_count(n - 2, l - 1)
    raise ValueError(f"unknown shape {shape!r}")


def aux_sums(point: KtwPoint) -> dict:
    """Pair sums used by the leading-order expansions."""
    b1, bc, W, y = point.arrays()
    deg = W.sum(axis=1)
    sq = (W * W).sum(axis=1)
    path2 = (deg * deg - sq).sum()
    sing_pair = _to_scalar(bc @ deg)
    if np.issubdtype(W.dtype, np.integer):
        path = int(path2) // 2
    else:
        path = float(path2) / 2
    return {
        "S_pair": _to_scalar(W.sum()) / 2 if not np.issubdtype(W.dtype, np.integer) else int(W.sum()) // 2,
        "sing_pair": sing_pair,
        "path": path,
        "pres_pair": _to_scalar(y.sum()),
    }


def approx_S(point: KtwPoint, p: Predicate, l: int) -> dict:
    """Residuals of the normalised sums against their leading-order forms."""
    q = key_quantities(point, p)
    aux = aux_sums(point)
    E = float(q.E)
    D = float(q.Delta)
    alpha, beta = float(q.alpha), float(q.beta)
    norm = math.factorial(l) / E ** l
    g = 1 + D
    s1 = sum_S(point, "S1", l)
    s2 = sum_S(point, "S2", l)
    s3 = sum_S(point, "S3", l)
    pred1 = (beta * g ** l - aux["sing_pair"] / E * l * g ** (l - 1)
             - beta * aux["path"] / E ** 2 * l * (l - 1) * (g ** (l - 2) if l >= 2 else 0.0))
    pred2 = alpha * g ** l
    pred3 = beta * aux["pres_pair"] / E * l * g ** (l - 1)
    res = {
        "S1": norm * s1 - pred1,
        "S2": norm * s2 - pred2,
        "S3": norm * s3 - pred3,
    }
    if l == 1 and point.is_exact:
        # the S2 identity is exact at l = 1; evaluate it without rounding
        s_pair_exact = q.S_pair
        res["S2_exact"] = Fraction(point.b[0]) * s_pair_exact / q.E - Fraction(q.alpha) * (1 + q.Delta)
    return res


def expansion_residual(point: KtwPoint, l: int):
    """beta*S_pair^l minus its matched, single-collision and path parts, over k^(2l-1)."""
    aux = aux_sums(point)
    beta = sum(point.b[1:])
    beta = int(beta) if point.is_vertex else float(beta)
    sp = aux["S_pair"]
    s1 = sum_S(point, "S1", l)
    lhs = beta * sp ** l
    rhs = (math.factorial(l) * s1 + l * aux["sing_pair"] * sp ** (l - 1)
           + (beta * aux["path"] * l * (l - 1) * sp ** (l - 2) if l >= 2 else 0))
    return (lhs - rhs) / point.k ** (2 * l - 1)
