"""Rounding polynomials and the rounding scheme built from them.

A rounding polynomial is h(x) = sum_{l=1}^m a_l x^l with h(0) = 0.  The
scheme turns a point of the local polytope into a bias-only rounding
function whose expected value is the quantity V evaluated here.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import math

from .errors import ConditionFailed, DegreeError, SchemeError, SearchExhausted
from .fourier import FourierTable, exact_table
from .ktw import KtwPoint, key_quantities, pair_target, sum_S
from .predicate import Predicate

COND2_LO = Fraction(-11, 20)
COND3_LO = Fraction(-1)
MAX_TRUNCATION = 200


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def fmt_frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _to_float(x) -> float:
    try:
        return float(x)
    except OverflowError:
        return math.inf if x > 0 else -math.inf


@dataclass(frozen=True)
class RoundingPolynomial:
    coeffs: tuple          # a_1 .. a_m
    kind: str = "custom"
    delta0: object = None
    B: object = None
    m0: object = None
    eta: object = None

    def __post_init__(self):
        cs = [_frac(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            raise ValueError("rounding polynomial is identically zero")
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_power_coeffs(cls, coeffs, **kw):
        """Build from c_0, c_1, ..., rejecting a nonzero constant term."""
        coeffs = [_frac(c) for c in coeffs]
        if coeffs and coeffs[0] != 0:
            raise ValueError("rounding polynomial must vanish at 0")
        return cls(tuple(coeffs[1:]), **kw)

    @property
    def m(self) -> int:
        return len(self.coeffs)

    def power_coeffs(self) -> list:
        return [Fraction(0)] + list(self.coeffs)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc + c) * x
        return acc

    def value_float(self, x: float) -> float:
        if self.kind == "truncated_exp" and self.m0 is not None:
            return _float_eval_exact(self.power_coeffs(), x)
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = (acc + float(c)) * x
        return acc

    def derivative_at_one(self, order: int) -> Fraction:
        total = Fraction(0)
        for l, c in enumerate(self.coeffs, start=1):
            f = 1
            for i in range(order):
                f *= l - i
            total += f * c
        return total

    def to_json(self) -> dict:
        out = {"kind": self.kind, "coeffs": [fmt_frac(c) for c in self.coeffs], "m": self.m}
        out["B"] = fmt_frac(self.B) if self.B is not None else None
        out["delta0"] = fmt_frac(self.delta0) if self.delta0 is not None else None
        if self.m0 is not None:
            out["m0"] = self.m0
        if self.eta is not None:
            out["eta"] = self.eta
        return out

    @classmethod
    def from_json(cls, d: dict):
        B = d.get("B")
        d0 = d.get("delta0")
        return cls(tuple(Fraction(c) for c in d["coeffs"]), kind=d.get("kind", "custom"),
                   delta0=Fraction(d0) if d0 is not None else None,
                   B=Fraction(B) if B is not None else None,
                   m0=d.get("m0"), eta=d.get("eta"))


def _float_eval_exact(power_coeffs, x: float) -> float:
    # the truncated exponential cancels badly in floating point, so go exact
    xf = _frac(x)
    acc = Fraction(0)
    for c in reversed(power_coeffs):
        acc = acc * xf + c
    return float(acc)


def cubic_h() -> RoundingPolynomial:
    """1 - (1-x)^3, the lowest-degree choice with vanishing first two derivatives at 1."""
    return RoundingPolynomial((Fraction(3), Fraction(-3), Fraction(1)), kind="cubic")


def b_constant(delta0) -> Fraction:
    """Decay rate max(5/delta0, ln(5/delta0^2)/0.45), rounded up on a 1e-6 grid."""
    delta0 = _frac(delta0)
    rational = 5 / delta0
    logarithmic = math.log(5 / float(delta0) ** 2) / 0.45
    if rational >= logarithmic:
        return Fraction(math.ceil(rational * 10**6), 10**6)
    return Fraction(math.ceil(logarithmic * 10**6), 10**6)


def exp_h_reference(x: float, delta0) -> float:
    """1 - (1-x)^3 exp(-B x) with the unrounded decay rate."""
    d = float(_frac(delta0))
    B = max(5 / d, math.log(5 / d ** 2) / 0.45)
    return 1 - (1 - x) ** 3 * math.exp(-B * x)


def _truncation_eta(B: Fraction, delta0: Fraction, m0: int) -> float:
    # Lagrange bound for the exponential's Taylor tail over Bx in [-B(1+1/delta0^2), B]
    lo = float(B * (1 + 1 / delta0 ** 2))
    hi = float(B)
    logs = []
    for y, growth in ((lo, 0.0), (hi, hi)):
        logs.append(growth + (m0 + 1) * math.log(y) - math.lgamma(m0 + 2))
    return math.exp(max(logs))


def truncated_h(delta0, m0: int) -> RoundingPolynomial:
    """1 - (1-x)^3 * sum_{l<=m0} (-Bx)^l / l!."""
    delta0 = _frac(delta0)
    B = b_constant(delta0)
    taylor = []
    term = Fraction(1)
    for l in range(m0 + 1):
        taylor.append(term)
        term = term * (-B) / (l + 1)
    cube = [Fraction(1), Fraction(-3), Fraction(3), Fraction(-1)]
    prod = [Fraction(0)] * (m0 + 4)
    for i, c in enumerate(cube):
        for j, t in enumerate(taylor):
            prod[i + j] += c * t
    power = [-c for c in prod]
    power[0] += 1
    return RoundingPolynomial.from_power_coeffs(
        power, kind="truncated_exp", delta0=delta0, B=B, m0=m0,
        eta=_truncation_eta(B, delta0, m0))


def truncated_h_search(delta0, m_hint=None, grid_step=Fraction(1, 1000)):
    """Smallest truncation order from m_hint (default 3) whose polynomial passes the check."""
    m0 = 3 if m_hint is None else m_hint
    while m0 <= MAX_TRUNCATION:
        h = truncated_h(delta0, m0)
        if _quick_reject(h, delta0, grid_step):
            m0 += 1
            continue
        report = check_h_conditions(h, delta0, grid_step)
        if report["passed"]:
            return h, report
        m0 += 1
    raise SearchExhausted(f"no truncation order up to {MAX_TRUNCATION} passes for delta0={delta0}")


# -- exact grid verification ---------------------------------------------

class _ExactPoly:
    """Rational polynomial evaluated through integer arithmetic on a fixed grid denominator."""

    def __init__(self, power_coeffs, M: int):
        cs = [Fraction(c) for c in power_coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.d = len(cs) - 1
        D = 1
        for c in cs:
            D = D * c.denominator // math.gcd(D, c.denominator)
        self.D = D
        self.M = M
        # R(y) = sum_j c_j D M^(d-j) y^j, so that D M^d p(x) = R(M x)
        self.R = [int(c * D) * M ** (self.d - j) for j, c in enumerate(cs)]
        self.scale = D * M ** self.d

    def value(self, N: int) -> Fraction:
        """p(N / M)."""
        acc = 0
        for r in reversed(self.R):
            acc = acc * N + r
        return Fraction(acc, self.scale)

    def block_bounds(self, N0: int, width: int):
        """Upper bounds on sup|p| and sup|p'| over [N0/M, (N0+width)/M]."""
        q = list(self.R)
        d = self.d
        for i in range(d):
            for j in range(d - 1, i - 1, -1):
                q[j] += N0 * q[j + 1]
        sup_p = sum(abs(c) * width ** i for i, c in enumerate(q))
        sup_dp = sum(i * abs(c) * width ** (i - 1) for i, c in enumerate(q) if i > 0)
        pad = 1 + 1e-12
        return (_to_float(Fraction(sup_p, self.scale)) * pad,
                _to_float(Fraction(sup_dp * self.M, self.scale)) * pad)


def _poly_divide_root(coeffs, root=1):
    """Synthetic division of sum c_j x^j by (x - root); returns (quotient, remainder)."""
    d = len(coeffs) - 1
    out = [Fraction(0)] * d
    acc = Fraction(0)
    for j in range(d, 0, -1):
        acc = acc * root + coeffs[j]
        out[j - 1] = acc
    rem = acc * root + coeffs[0]
    return out, rem


def _factor_pieces(h: RoundingPolynomial):
    """(g, r) with h = x g and h - 1 = (x-1)^3 r; r is None when h does not factor so."""
    pc = h.power_coeffs()
    g = pc[1:]
    shifted = list(pc)
    shifted[0] -= 1
    r = shifted
    for _ in range(3):
        if len(r) < 2:
            return g, None
        r, rem = _poly_divide_root(r)
        if rem != 0:
            return g, None
    return g, (r if r else [Fraction(0)])


def _grid(lo: Fraction, hi: Fraction, step: Fraction) -> list:
    pts = []
    n = int((hi - lo) / step)
    for i in range(n + 1):
        pts.append(lo + i * step)
    if pts[-1] < hi:
        pts.append(hi)
    return pts


def _lcm_den(*xs) -> int:
    M = 1
    for x in xs:
        d = Fraction(x).denominator
        M = M * d // math.gcd(M, d)
    return M


BLOCK_CELLS = 50


def _scan(points_x, M, quantity, bounds_for_block, fail_fast=False, reverse=False):
    """Walk cells of a grid in blocks and return per-cell upper estimates.

    quantity(N) -> exact value at grid point N/M (the quantity must stay <= 0)
    bounds_for_block(N0, width) -> Lipschitz bound over the block
    Returns (worst cell sup estimate, its x, max slack, first grid violation x).
    """
    Ns = [int(x * M) for x in points_x]
    vals = {}

    def val(N):
        if N not in vals:
            vals[N] = quantity(N)
        return vals[N]

    worst = -math.inf
    worst_x = None
    max_slack = 0.0
    first_violation = None
    idx_blocks = list(range(0, len(Ns) - 1, BLOCK_CELLS))
    if reverse:
        idx_blocks.reverse()
    for start in idx_blocks:
        stop = min(start + BLOCK_CELLS, len(Ns) - 1)
        N0, N1 = Ns[start], Ns[stop]
        L = bounds_for_block(N0, N1 - N0)
        cells = range(start, stop)
        if reverse:
            cells = reversed(cells)
        for i in cells:
            va, vb = val(Ns[i]), val(Ns[i + 1])
            for N, v in ((Ns[i], va), (Ns[i + 1], vb)):
                if v > 0 and (first_violation is None or N < first_violation):
                    first_violation = N
            slack = L * (Ns[i + 1] - Ns[i]) / M
            est = _to_float(max(va, vb)) + slack
            max_slack = max(max_slack, slack)
            if est > worst:
                worst = est
                worst_x = Fraction(Ns[i] if va >= vb else Ns[i + 1], M)
            if fail_fast and est > 0:
                return worst, worst_x, max_slack, first_violation
    fv = Fraction(first_violation, M) if first_violation is not None else None
    return worst, worst_x, max_slack, fv


def _condition_setup(h, delta0, grid_step):
    delta0 = _frac(delta0)
    step = _frac(grid_step)
    hi2 = 1 / delta0 ** 2
    pts2 = _grid(1 + COND2_LO, 1 + hi2, step)
    pts3 = _grid(1 + COND3_LO, 1 + COND2_LO, step)
    M = _lcm_den(step, COND2_LO, hi2, *pts2[-2:])
    return delta0, step, hi2, pts2, pts3, M


def _quick_reject(h, delta0, grid_step) -> bool:
    """Cheap necessary test on a thinned grid; True means the full check must fail."""
    delta0, step, hi2, pts2, pts3, M = _condition_setup(h, delta0, grid_step)
    if h.derivative_at_one(1) != 0 or h.derivative_at_one(2) != 0 or h(1) != 1:
        return True
    bound = delta0 ** 2 / 5
    for x in list(reversed(pts2))[::20]:
        if abs(h(x) - 1) > bound * abs(x - 1):
            return True
    for x in pts3[::20]:
        v = h(x)
        if v < 0 or v > 1:
            return True
    return False


def check_h_conditions(h: RoundingPolynomial, delta0, grid_step=Fraction(1, 1000),
                       raise_on_fail: bool = False, fail_fast: bool = False) -> dict:
    """Verify the three conditions a rounding polynomial must meet.

    1. h'(1) = h''(1) = 0 exactly (and h(1) = 1).
    2. |h(1+D) - 1| <= delta0^2 |D| / 5 for D in [-0.55, 1/delta0^2].
    3. 0 <= h(1+D) <= 1 for D in [-1, -0.55].

    Grid values are exact.  Between grid points each cell is charged the
    local derivative bound times the cell width, so a pass covers the whole
    interval.
    """
    delta0, step, hi2, pts2, pts3, M = _condition_setup(h, delta0, grid_step)
    h1 = h(Fraction(1))
    d1 = h.derivative_at_one(1)
    d2 = h.derivative_at_one(2)
    c1_ok = d1 == 0 and d2 == 0 and h1 == 1
    report = {
        "delta0": fmt_frac(delta0),
        "grid_step": fmt_frac(step),
        "condition1": {"passed": c1_ok, "h_at_1": fmt_frac(h1),
                       "h_prime_at_1": fmt_frac(d1), "h_second_at_1": fmt_frac(d2)},
    }
    g, r = _factor_pieces(h)
    hp = _ExactPoly(h.power_coeffs(), M)
    gp = _ExactPoly(g, M)
    rp = _ExactPoly(r, M) if r is not None else None
    bound2 = delta0 ** 2 / 5

    if rp is not None:
        # condition 2 as (x-1)^2 |r(x)| <= delta0^2/5, which does not degenerate at x = 1
        def q2(N):
            dx = Fraction(N, M) - 1
            return dx * dx * abs(rp.value(N)) - bound2

        def lip2(N0, w):
            sr, sdr = rp.block_bounds(N0, w)
            far = float(max(abs(Fraction(N0, M) - 1), abs(Fraction(N0 + w, M) - 1)))
            return 2 * far * sr + far * far * sdr
    else:
        def q2(N):
            dx = Fraction(N, M) - 1
            return abs(hp.value(N) - 1) - bound2 * abs(dx)

        def lip2(N0, w):
            return hp.block_bounds(N0, w)[1] + float(bound2)

    worst, wx, slack, fv = _scan(pts2, M, q2, lip2, fail_fast=fail_fast, reverse=True)
    c2 = {"passed": worst <= 0, "interval": [fmt_frac(COND2_LO), fmt_frac(hi2)],
          "min_margin": -worst, "worst_point": float(wx - 1), "max_slack": slack,
          "first_violation": None}
    if fv is not None:
        dv = fv - 1
        c2["first_violation"] = float(dv)
        c2["violation_lhs"] = float(abs(h(fv) - 1))
        c2["violation_rhs"] = float(bound2 * abs(dv))
    report["condition2"] = c2
    if fail_fast and not c2["passed"]:
        report["passed"] = False
        return report

    # condition 3: h = x g >= 0 and 1 - h = (1-x)^3 r >= 0
    def lower(N):
        return -gp.value(N)

    def lip_g(N0, w):
        return gp.block_bounds(N0, w)[1]

    if rp is not None:
        def upper(N):
            return -rp.value(N)

        def lip_u(N0, w):
            return rp.block_bounds(N0, w)[1]
    else:
        def upper(N):
            return hp.value(N) - 1

        def lip_u(N0, w):
            return hp.block_bounds(N0, w)[1]

    wl, xl, sl, fl = _scan(pts3, M, lower, lip_g, fail_fast=fail_fast)
    wu, xu, su, fu = _scan(pts3, M, upper, lip_u, fail_fast=fail_fast)
    worst3, x3 = (wl, xl) if wl >= wu else (wu, xu)
    firsts = [f for f in (fl, fu) if f is not None]
    report["condition3"] = {"passed": worst3 <= 0, "interval": [fmt_frac(COND3_LO), fmt_frac(COND2_LO)],
                            "min_margin": -worst3, "worst_point": float(x3 - 1),
                            "max_slack": max(sl, su),
                            "first_violation": float(min(firsts) - 1) if firsts else None}
    report["passed"] = c1_ok and c2["passed"] and report["condition3"]["passed"]
    if raise_on_fail and not report["passed"]:
        for which in (1, 2, 3):
            sec = report[f"condition{which}"]
            if not sec["passed"]:
                raise ConditionFailed(which, sec.get("worst_point", 0.0))
    return report


# -- the rounding scheme --------------------------------------------------

def odd_multiplicity(l: int) -> int:
    """(2l+1)! / (2^l l!): ways to split 2l+1 indices into a singleton and l pairs."""
    return math.factorial(2 * l + 1) // (2 ** l * math.factorial(l))


@dataclass
class Scheme:
    k: int
    a: int
    h: RoundingPolynomial
    c1: Fraction
    c_odd: dict
    epsilon_scale: Fraction
    table: FourierTable = field(repr=False, default=None)
    pair_set_factorial: bool = True

    @property
    def predicate(self) -> Predicate:
        return Predicate(self.k, self.a)

    def to_json(self) -> dict:
        return {"k": self.k, "a": self.a, "h": self.h.to_json(), "c1": fmt_frac(self.c1),
                "c_odd": {str(l): fmt_frac(c) for l, c in sorted(self.c_odd.items())},
                "epsilon_scale": float(self.epsilon_scale),
                "epsilon_scale_exact": fmt_frac(self.epsilon_scale),
                "pair_set_factorial": self.pair_set_factorial}

    @classmethod
    def from_json(cls, d: dict):
        return build_scheme(Predicate(d["k"], d["a"]), RoundingPolynomial.from_json(d["h"]),
                            pair_set_factorial=d.get("pair_set_factorial", True))


def build_scheme(p: Predicate, h: RoundingPolynomial, pair_set_factorial: bool = True) -> Scheme:
    """Scheme coefficients for predicate p and rounding polynomial h.

    pair_set_factorial=False drops the l! from c_{2l+1}; kept only to
    show the leading-order mismatch that factor repairs.
    """
    k, m = p.k, h.m
    if k - 2 * m - 2 < 0:
        raise DegreeError(f"degree {m} needs k >= {2 * m + 2}, got k={k}")
    E = pair_target(p)
    if E <= 0:
        raise SchemeError(f"pair target {E} is not positive for k={k}, a={p.a}")
    d = p.delta
    c1 = d * k * k + k / d
    base = 2 ** (k - 2) * math.factorial(p.u - 1) * math.factorial(p.v - 1)
    c_odd = {}
    for l, al in enumerate(h.coeffs, start=1):
        # the l! makes degree 2l+1 contribute a_l k beta (1+Delta)^l to leading order;
        # without it the sums of unordered pair sets leave a stray 1/l!
        c_odd[l] = (al * (math.factorial(l) if pair_set_factorial else 1) * base
                    / (math.factorial(k - 2 * l - 2) * d ** (2 * l) * k ** (2 * l - 1) * E ** l))
    biggest = max([c1] + [abs(c) * odd_multiplicity(l) for l, c in c_odd.items()])
    table = exact_table(p, t_max=min(k - 1, 2 * m + 1))
    return Scheme(k, p.a, h, c1, c_odd, 1 / biggest, table, pair_set_factorial)


def _scheme_weights(s: Scheme):
    """Exact products coefficient * Fourier value, formed before touching any float."""
    tb = s.table
    w1 = (s.c1 * tb.president, s.c1 * tb.coeff(False, 1))
    wl = {}
    for l, c in s.c_odd.items():
        wl[l] = (c * tb.coeff(False, 2 * l + 1), c * tb.coeff(True, 2 * l))
    return w1, wl


def evaluate_scheme(s: Scheme, point: KtwPoint) -> dict:
    """Expected value V of the rounding at a point, with per-degree parts.

    Exact (Fraction) for vertices, float otherwise.
    """
    if point.k != s.k:
        raise ValueError("point and scheme arity differ")
    exact = point.is_vertex
    conv = (lambda x: x) if exact else float
    (wp, wc), wl = _scheme_weights(s)
    alpha = point.b[0]
    beta = sum(point.b[1:])
    parts = {1: conv(wp) * conv(alpha) + conv(wc) * conv(beta)}
    for l, (wcit, wpres) in wl.items():
        s1 = sum_S(point, "S1", l)
        s23 = sum_S(point, "S2", l) + sum_S(point, "S3", l)
        parts[2 * l + 1] = conv(wcit) * s1 + conv(wpres) * s23
    total = sum(parts.values())
    return {"V": total, "per_degree": parts, "exact": exact}


@lru_cache(maxsize=64)
def krawtchouk_table(n: int, s_max: int):
    """rows[t][s] = sum_j (-1)^(s-j) C(t, j) C(n-t, s-j) for s <= s_max."""
    row = [(-1) ** s * math.comb(n, s) for s in range(n + 1)]
    rows = [tuple(row[: s_max + 1])]
    for _ in range(n):
        # multiply by (1+z) then divide by (1-z)
        up = [row[0]] + [row[i] + row[i - 1] for i in range(1, n + 1)]
        acc = 0
        nxt = []
        for c in up:
            acc += c
            nxt.append(acc)
        row = nxt
        rows.append(tuple(row[: s_max + 1]))
    return tuple(rows)


def vertex_values(s: Scheme) -> dict:
    """Exact V for every satisfying orbit (x1, t).

    On a vertex the symmetric sums collapse to Krawtchouk values times the
    number of ways to arrange a singleton and pairs on a fixed index set.
    """
    p = s.predicate
    n = s.k - 1
    m = s.h.m
    K = krawtchouk_table(n, 2 * m + 1)
    (wp, wc), wl = _scheme_weights(s)
    cit = {l: wl[l][0] * odd_multiplicity(l) for l in wl}
    pres = {l: wl[l][1] * odd_multiplicity(l) for l in wl}
    den = 1
    for f in [wp, wc, *cit.values(), *pres.values()]:
        den = den * f.denominator // math.gcd(den, f.denominator)
    ip, ic = int(wp * den), int(wc * den)
    icit = {l: int(f * den) for l, f in cit.items()}
    ipres = {l: int(f * den) for l, f in pres.items()}
    out = {}
    for x1, t in p.orbits():
        row = K[t]
        num = ip * x1 + ic * row[1]
        for l in icit:
            num += icit[l] * row[2 * l + 1] + x1 * ipres[l] * row[2 * l]
        out[(x1, t)] = Fraction(num, den)
    return out


def evaluate_vertex_fast(s: Scheme, x1: int, t: int) -> Fraction:
    vals = vertex_values(s)
    if (x1, t) not in vals:
        raise ValueError(f"orbit ({x1}, {t}) is not satisfying")
    return vals[(x1, t)]


def main_term_expansion(s: Scheme, point: KtwPoint) -> dict:
    """Split V into k(beta - alpha/delta) h(1+Delta) + degree-one part and a residual."""
    p = s.predicate
    q = key_quantities(point, p)
    V = evaluate_scheme(s, point)["V"]
    (wp, wc), _ = _scheme_weights(s)
    if point.is_vertex:
        main = s.k * (q.beta - q.alpha / p.delta) * s.h(1 + q.Delta) + wp * q.alpha + wc * q.beta
    else:
        main = (s.k * (float(q.beta) - float(q.alpha) / float(p.delta)) * s.h.value_float(1 + float(q.Delta))
                + float(wp) * float(q.alpha) + float(wc) * float(q.beta))
    return {"V": V, "main": main, "residual": V - main, "Delta": q.Delta}
