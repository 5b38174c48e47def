"""Exact odd-degree Fourier coefficients of presidential predicates.

By symmetry every coefficient depends only on whether the index set holds
the president and on how many citizens it holds.  Sets of even size have
coefficient zero because the predicate is odd.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
import math

import numpy as np

from .errors import RangeError
from .predicate import Predicate

BRUTE_FORCE_CAP = 14


@lru_cache(maxsize=None)
def _alt_prefix(t: int, upto: int) -> int:
    """sum_{j=0}^{upto} (-1)^j C(t, j)."""
    return sum((-1) ** j * math.comb(t, j) for j in range(upto + 1))


def _double_sum(k: int, tau: int, t: int) -> int:
    # sum_{i<=tau} sum_{j<=tau-i} (-1)^j C(k-t-1, i) C(t, j); inner sums via prefix table
    return sum(math.comb(k - t - 1, i) * _alt_prefix(t, tau - i) for i in range(tau + 1))


@dataclass
class FourierTable:
    k: int
    a: int
    president: Fraction
    citizens: dict = field(default_factory=dict)   # odd t -> coeff of t citizens
    mixed: dict = field(default_factory=dict)      # even t >= 2 -> coeff of president + t citizens
    sign_violations: list = field(default_factory=list)

    def coeff(self, with_president: bool, t: int) -> Fraction:
        if with_president:
            if t == 0:
                return self.president
            return self.mixed.get(t, Fraction(0)) if t % 2 == 0 else Fraction(0)
        return self.citizens.get(t, Fraction(0)) if t % 2 == 1 else Fraction(0)

    def parseval(self) -> Fraction:
        total = self.president ** 2
        for t, c in self.citizens.items():
            total += math.comb(self.k - 1, t) * c * c
        for t, c in self.mixed.items():
            total += math.comb(self.k - 1, t) * c * c
        return total

    def rows(self, with_asymptotic: bool = True):
        """(kind, t, exact, asymptotic-or-None) rows in increasing t."""
        out = [("P", 0, self.president, None)]
        ts = sorted(set(self.citizens) | set(self.mixed))
        for t in ts:
            asym = None
            if with_asymptotic:
                try:
                    asym = asymptotic_citizen_coeff(self.k, Fraction(self.a, self.k), t)
                except ValueError:
                    asym = None
            if t in self.citizens:
                out.append(("C", t, self.citizens[t], asym))
            else:
                out.append(("P+C", t, self.mixed[t], asym))
        return out


def exact_table(p: Predicate, t_max=None) -> FourierTable:
    k, tau = p.k, p.tau
    if t_max is None:
        t_max = k - 1
    if not 0 <= t_max <= k - 1:
        raise RangeError(f"t_max={t_max} outside [0, {k - 1}]")
    scale = Fraction(1, 2 ** (k - 2))
    pres = 1 - scale * sum(math.comb(k - 1, l) for l in range(tau + 1))
    table = FourierTable(k=k, a=p.a, president=pres)
    for t in range(1, t_max + 1):
        d = _double_sum(k, tau, t)
        if t % 2:
            table.citizens[t] = scale * d
            if d <= 0:
                table.sign_violations.append(("C", t))
        else:
            table.mixed[t] = -scale * d
            if d <= 0:
                table.sign_violations.append(("P+C", t))
    return table


def _all_points(k: int) -> np.ndarray:
    return np.array(list(product((1, -1), repeat=k)), dtype=np.int64)


def brute_force_coeff(p: Predicate, subset) -> Fraction:
    """Average of P(x) * prod_{i in subset} x_i over the cube; subset is 1-based."""
    if p.k > BRUTE_FORCE_CAP:
        raise RangeError(f"brute force capped at k={BRUTE_FORCE_CAP}")
    idx = sorted(set(subset))
    if any(not 1 <= i <= p.k for i in idx):
        raise RangeError(f"subset {subset} not inside [1, {p.k}]")
    xs = _all_points(p.k)
    vals = np.where(xs[:, 0] * p.a + xs[:, 1:].sum(axis=1) > 0, 1, -1)
    chars = xs[:, [i - 1 for i in idx]].prod(axis=1) if idx else 1
    return Fraction(int((vals * chars).sum()), 2 ** p.k)


def brute_force_table(p: Predicate) -> FourierTable:
    """Orbit coefficients from direct averaging, for cross-checking."""
    if p.k > BRUTE_FORCE_CAP:
        raise RangeError(f"brute force capped at k={BRUTE_FORCE_CAP}")
    xs = _all_points(p.k)
    vals = np.where(xs[:, 0] * p.a + xs[:, 1:].sum(axis=1) > 0, 1, -1)
    denom = 2 ** p.k
    cumul = np.cumprod(xs[:, 1:], axis=1)   # column t-1: product of first t citizens

    def avg(chars):
        return Fraction(int((vals * chars).sum()), denom)

    table = FourierTable(k=p.k, a=p.a, president=avg(xs[:, 0]))
    for t in range(1, p.k):
        if t % 2:
            table.citizens[t] = avg(cumul[:, t - 1])
        else:
            table.mixed[t] = avg(xs[:, 0] * cumul[:, t - 1])
    return table


def asymptotic_citizen_coeff(k: int, delta, t: int) -> float:
    """Leading two-term approximation of the coefficient with t citizens.

    Uses the exact factorial ratio; for even t the value is for the set that
    also holds the president, which is the negation.
    """
    delta = Fraction(delta)
    u = (1 + delta) * k / 2
    v = (1 - delta) * k / 2
    if u.denominator != 1 or v.denominator != 1 or v < 1:
        raise ValueError(f"delta*k must give integral u, v for k={k}, delta={delta}")
    if not 1 <= t <= k - 1:
        raise ValueError(f"t={t} outside [1, {k - 1}]")
    u, v = int(u), int(v)
    ratio = Fraction(math.factorial(k - t - 1), math.factorial(u - 1) * math.factorial(v - 1))
    dk = delta * k
    poly = dk ** (t - 1) - Fraction((t - 1) * (t - 2), 2) * delta ** (t - 3) * k ** (t - 2)
    val = ratio * poly / 2 ** (k - 2)
    return float(-val if t % 2 == 0 else val)


def alternating_prefix_identity(t: int, l: int) -> bool:
    """Alternating binomial prefix sum against its closed form."""
    lhs = sum((-1) ** j * math.comb(t, j) for j in range(l + 1))
    rhs = (-1) ** l * math.comb(t - 1, l)
    return lhs == rhs


def weighted_binomial_identities(a, b, k: int) -> tuple:
    """Both weighted binomial identities checked exactly; returns (ok1, ok2)."""
    a, b = Fraction(a), Fraction(b)
    lhs1 = Fraction(0)
    lhs2 = Fraction(0)
    for i in range(k + 1):
        if i > 0:
            lhs1 += math.comb(k, i) * a ** (i - 1) * b ** (k - i) * i * (i + 1)
        if i < k:
            lhs2 += math.comb(k, i) * a ** i * b ** (k - i - 1) * (k - i) * (k - i + 1)
    s = a + b
    tail1 = k * (k - 1) * a * s ** (k - 2) if k >= 2 else 0
    tail2 = k * (k - 1) * b * s ** (k - 2) if k >= 2 else 0
    rhs1 = 2 * k * s ** (k - 1) + tail1
    rhs2 = 2 * k * s ** (k - 1) + tail2
    return lhs1 == rhs1, lhs2 == rhs2


def verify_identities(n_trials: int = 1000, seed: int = 0) -> dict:
    """Random exact checks of the two binomial identities; returns failure counts."""
    rng = np.random.default_rng(seed)
    failures = {"alternating": 0, "weighted_first": 0, "weighted_second": 0}
    examples = []
    for _ in range(n_trials):
        t = int(rng.integers(1, 31))
        l = int(rng.integers(0, 31))
        if not alternating_prefix_identity(t, l):
            failures["alternating"] += 1
            examples.append(("alternating", t, l))
        a = int(rng.integers(-10, 11))
        b = int(rng.integers(-10, 11))
        while a == 0 or b == 0:
            a = int(rng.integers(-10, 11))
            b = int(rng.integers(-10, 11))
        kk = int(rng.integers(2, 16))
        ok1, ok2 = weighted_binomial_identities(a, b, kk)
        if not ok1:
            failures["weighted_first"] += 1
            examples.append(("weighted_first", a, b, kk))
        if not ok2:
            failures["weighted_second"] += 1
            examples.append(("weighted_second", a, b, kk))
    return {"trials": n_trials, "failures": failures, "examples": examples[:10]}
