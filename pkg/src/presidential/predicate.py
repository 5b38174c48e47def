"""Presidential predicates P(x) = sign(a*x_1 + x_2 + ... + x_k).

Coordinate 1 is the president, coordinates 2..k are the citizens.  A
satisfying assignment is determined up to citizen permutation by its orbit
(x1, t), where t counts the citizens set to +1.
"""
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
import math

from .errors import DictatorError, ParityError, RangeError

ENUMERATION_CAP = 24


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**9)
    return Fraction(value)


@dataclass(frozen=True)
class Predicate:
    k: int
    a: int

    def __post_init__(self):
        if self.k < 3:
            raise RangeError(f"arity k={self.k} must be at least 3")
        if self.a < 1:
            raise RangeError(f"president weight a={self.a} must be at least 1")
        if (self.a + self.k - 1) % 2 == 0:
            raise ParityError(f"a + k - 1 = {self.a + self.k - 1} is even")
        if self.a >= self.k - 1:
            raise DictatorError(f"a={self.a} >= k-1={self.k - 1}")

    @property
    def delta(self) -> Fraction:
        return Fraction(self.a, self.k)

    @property
    def u(self) -> int:
        return (self.k + self.a) // 2

    @property
    def v(self) -> int:
        return (self.k - self.a) // 2

    @property
    def tau(self) -> int:
        return (self.k - self.a - 1) // 2

    @property
    def random_rate(self) -> Fraction:
        return Fraction(1, 2)

    @property
    def is_monarchy(self) -> bool:
        return self.a == self.k - 2

    def margin(self, x1: int, t: int) -> int:
        """Weighted sum a*x1 + sum of citizens for an orbit (x1, t)."""
        return self.a * x1 + 2 * t - (self.k - 1)

    def evaluate(self, x) -> int:
        if len(x) != self.k:
            raise ValueError(f"expected {self.k} coordinates, got {len(x)}")
        s = self.a * x[0] + sum(x[1:])
        return 1 if s > 0 else -1

    def orbits(self):
        """Satisfying orbits (x1, t), ordered by x1 descending then t."""
        out = []
        for x1 in (1, -1):
            for t in range(self.k):
                if self.margin(x1, t) >= 1:
                    out.append((x1, t))
        return out

    def orbit_size(self, t: int) -> int:
        return math.comb(self.k - 1, t)

    def satisfying_count(self) -> int:
        return sum(self.orbit_size(t) for _, t in self.orbits())

    def satisfying_assignments(self):
        """Stream all satisfying assignments grouped by orbit.

        Yields (x1, t, x) with x a tuple of +-1 of length k.
        """
        if self.k > ENUMERATION_CAP:
            raise RangeError(f"k={self.k} exceeds enumeration cap {ENUMERATION_CAP}")
        n = self.k - 1
        for x1, t in self.orbits():
            for plus in combinations(range(n), t):
                cit = [-1] * n
                for i in plus:
                    cit[i] = 1
                yield x1, t, (x1, *cit)

    def orbit_representative(self, x1: int, t: int):
        return (x1,) + (1,) * t + (-1,) * (self.k - 1 - t)

    def info(self) -> dict:
        d = self.delta
        return {
            "k": self.k,
            "a": self.a,
            "delta": f"{d.numerator}/{d.denominator}",
            "u": self.u,
            "v": self.v,
            "tau": self.tau,
            "r_p": "1/2",
        }


def new_predicate(k: int, a: int) -> Predicate:
    return Predicate(k, a)


def from_delta(k: int, delta) -> Predicate:
    """Nearest valid integer weight for a real president weight delta*k.

    For non-integer delta*k the weight is whichever of floor/ceil has the
    right parity.  When delta*k is an integer of the wrong parity the weight
    is rounded up (down only if rounding up would leave the valid range).
    """
    if k < 3:
        raise RangeError(f"arity k={k} must be at least 3")
    delta = _as_fraction(delta)
    dk = delta * k
    if dk.denominator == 1:
        a = int(dk)
        if (a + k) % 2:
            a = a + 1 if a + 1 <= k - 2 else a - 1
    else:
        a = math.floor(dk)
        if (a + k) % 2:
            a += 1
    if not 1 <= a <= k - 2:
        raise RangeError(f"weight {a} for delta={delta}, k={k} is outside [1, k-2]")
    return Predicate(k, a)
