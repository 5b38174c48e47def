"""Certification of a rounding scheme: vertex sweep, interior sampling, scans.

Vertex values are exact; the vertex minimum over the orbit list is the true
minimum over all satisfying assignments because V is constant on orbits.
Interior sampling over mixtures is evidence only, never proof.
"""
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
import math

import numpy as np

from .errors import BudgetError, DegreeError, ParityError, DictatorError, RangeError, SchemeError
from .ktw import (MAX_MATCHING_ROWS, key_quantities, matching_count, pair_target, sample_mixture, vertex_delta,
                  vertex_delta_parts)
from .predicate import Predicate
from .rounding import (COND2_LO, RoundingPolynomial, Scheme, _to_float, build_scheme, evaluate_scheme,
                       fmt_frac, vertex_values)


def vertex_sweep(s: Scheme) -> dict:
    vals = vertex_values(s)
    argmin = min(vals, key=lambda o: vals[o])
    return {"values": vals, "min_value": vals[argmin], "argmin": argmin}


def bias_bound_margins(p: Predicate) -> dict:
    """Exact slack of delta*k*alpha + beta >= (delta^2 k - 1)|Delta|/4 + 1/2 at each orbit."""
    k, a = p.k, p.a
    out = {}
    for x1, t in p.orbits():
        num, den = vertex_delta_parts(k, a, t)
        lhs = p.margin(x1, t)          # delta*k*x1 + beta equals a*x1 + beta
        q = 4 * k * abs(den)
        out[(x1, t)] = Fraction(q * lhs - (a * a - k) * abs(num) - 2 * k * abs(den), q)
    return out


def bias_bound_check(p: Predicate) -> dict:
    margins = bias_bound_margins(p)
    worst = min(margins, key=lambda o: margins[o])
    return {"ok": margins[worst] >= 0, "min_margin": margins[worst], "argmin": worst}


def delta_range(p: Predicate) -> dict:
    """Extremes of Delta over satisfying vertices, with where they occur."""
    ts = {t for _, t in p.orbits()}
    ds = {(0, t): vertex_delta(p, t) for t in ts}
    lo = min(ds.values())
    hi = max(ds.values())
    return {"min": lo, "max": hi,
            "argmin_t": sorted({t for (_, t), v in ds.items() if v == lo}),
            "argmax_t": sorted({t for (_, t), v in ds.items() if v == hi})}


def _case_split(entries) -> dict:
    """entries: iterable of (Delta, V); splits at Delta = -0.55."""
    out = {}
    for name, test in (("delta_ge_-0.55", lambda d: d >= COND2_LO), ("delta_lt_-0.55", lambda d: d < COND2_LO)):
        vs = [v for d, v in entries if test(d)]
        out[name] = {"count": len(vs), "min_value": _to_float(min(vs)) if vs else None}
    return out


def mixture_budget_ok(k: int, m: int, budget: int = MAX_MATCHING_ROWS) -> bool:
    n = k - 1
    return all(matching_count(n, l) <= budget for l in range(1, m + 1))


def interior_certify(s: Scheme, n_points: int, support_size: int, seed: int) -> dict:
    """V at random mixtures of satisfying vertices.

    Sample i draws from its own stream seeded by (seed, i), so results do
    not depend on evaluation order.
    """
    p = s.predicate
    if not mixture_budget_ok(s.k, s.h.m):
        raise BudgetError(f"mixture sums of degree {2 * s.h.m + 1} at k={s.k} exceed the enumeration budget")
    values = []
    deltas = []
    findings = []
    worst = None
    for i in range(n_points):
        rng = np.random.default_rng([seed, i])
        pt = sample_mixture(p, support_size, rng)
        q = key_quantities(pt, p)
        V = evaluate_scheme(s, pt)["V"]
        values.append(V)
        deltas.append(q.Delta)
        if q.Delta < COND2_LO and not q.alpha > 0:
            findings.append({"sample": i, "Delta": float(q.Delta), "alpha": float(q.alpha)})
        if worst is None or V < worst[0]:
            worst = (V, i, float(q.Delta), float(q.alpha), float(q.beta))
    hist_edges = np.linspace(-1.5, 3.0, 19)
    hist, _ = np.histogram([float(d) for d in deltas], bins=hist_edges)
    return {
        "n_points": n_points,
        "support_size": support_size,
        "seed": seed,
        "min_value": worst[0] if worst else math.inf,
        "worst": ({"sample": worst[1], "Delta": worst[2], "alpha": worst[3], "beta": worst[4]}
                  if worst else None),
        "delta_histogram": {"edges": [float(e) for e in hist_edges], "counts": [int(c) for c in hist]},
        "alpha_positive_below_cut": not findings,
        "findings": findings,
        "case_split": _case_split(list(zip(deltas, values))),
    }


def certify(p: Predicate, h: RoundingPolynomial, delta0=None, samples: int = 0,
            support_size: int = 8, seed: int = 0, scheme: Scheme = None) -> dict:
    s = scheme if scheme is not None else build_scheme(p, h)
    sweep = vertex_sweep(s)
    bb = bias_bound_check(p)
    dr = delta_range(p)
    entries = [(vertex_delta(p, t), v) for (x1, t), v in sweep["values"].items()]
    report = {
        "k": p.k,
        "a": p.a,
        "delta": fmt_frac(p.delta),
        "delta0": fmt_frac(delta0) if delta0 is not None else None,
        "h": h.to_json(),
        "min_vertex_value": _to_float(sweep["min_value"]),
        "min_vertex_value_exact": fmt_frac(sweep["min_value"]),
        "argmin_vertex": {"x1": sweep["argmin"][0], "t": sweep["argmin"][1]},
        "vertex_values": [{"x1": x1, "t": t, "V": _to_float(v)} for (x1, t), v in sorted(sweep["values"].items())],
        "bias_bound_ok": bb["ok"],
        "bias_bound_min_margin": float(bb["min_margin"]),
        "bias_bound_min_margin_exact": fmt_frac(bb["min_margin"]),
        "delta_bounds": {"min": float(dr["min"]), "max": float(dr["max"]),
                         "argmin_t": dr["argmin_t"], "argmax_t": dr["argmax_t"]},
        "case_split_vertices": _case_split(entries),
    }
    min_sampled = math.inf
    if samples > 0:
        try:
            inner = interior_certify(s, samples, support_size, seed)
            min_sampled = inner.pop("min_value")
            report["sampling"] = dict(inner, status="done")
        except BudgetError as exc:
            report["sampling"] = {"status": "skipped", "reason": str(exc)}
    else:
        report["sampling"] = {"status": "skipped", "reason": "no samples requested"}
    report["min_sampled_value"] = None if math.isinf(min_sampled) else float(min_sampled)
    report["passed"] = bool(sweep["min_value"] > 0 and min_sampled > 0)
    return report


# -- scans over k ------------------------------------------------------------

SCAN_COLUMNS = ["k", "a", "delta", "min_vertex_value", "argmin_x1", "argmin_t", "bias_bound_margin",
                "delta_min", "delta_max", "passed", "status"]


def valid_weights(k: int, delta0) -> list:
    """Valid president weights with delta0 <= a/k <= 1 - 2/k."""
    delta0 = Fraction(delta0)
    out = []
    for a in range(1, k - 1):
        if (a + k) % 2 or Fraction(a, k) < delta0:
            continue
        out.append(a)
    return out


def scan_cell(k: int, a: int, h: RoundingPolynomial) -> dict:
    """One scan row; shared with single-cell certification so numbers agree exactly."""
    p = Predicate(k, a)
    bb = bias_bound_check(p) if pair_target(p) > 0 else None
    row = {"k": k, "a": a, "delta": fmt_frac(p.delta), "min_vertex_value": None, "argmin_x1": None,
           "argmin_t": None, "bias_bound_margin": float(bb["min_margin"]) if bb else None,
           "delta_min": None, "delta_max": None, "passed": False, "status": "ok"}
    if bb is not None:
        dr = delta_range(p)
        row["delta_min"], row["delta_max"] = float(dr["min"]), float(dr["max"])
    try:
        s = build_scheme(p, h)
    except DegreeError:
        row["status"] = "degree too small"
        return row
    except SchemeError:
        row["status"] = "scheme undefined"
        return row
    sweep = vertex_sweep(s)
    row["min_vertex_value"] = _to_float(sweep["min_value"])
    row["argmin_x1"], row["argmin_t"] = sweep["argmin"]
    row["passed"] = bool(sweep["min_value"] > 0)
    return row


def _scan_k_rows(args):
    k, delta0, h = args
    weights = valid_weights(k, delta0)
    if not weights:
        return [{"k": k, "a": None, "delta": None, "min_vertex_value": None, "argmin_x1": None,
                 "argmin_t": None, "bias_bound_margin": None, "delta_min": None, "delta_max": None,
                 "passed": None, "status": "no predicate"}]
    return [scan_cell(k, a, h) for a in weights]


def _first_stable(rows, key) -> object:
    """Smallest k such that every row at k' >= k satisfies key (rows with no predicate are vacuous)."""
    by_k = {}
    for r in rows:
        by_k.setdefault(r["k"], []).append(r)
    ks = sorted(by_k)
    first = None
    for kk in reversed(ks):
        rs = [r for r in by_k[kk] if r["status"] != "no predicate"]
        if all(key(r) for r in rs):
            first = kk
        else:
            break
    return first


def scan_k(delta0, h: RoundingPolynomial, k_range, threads: int = 1) -> dict:
    """Min vertex value over all valid weights for each k; rows ordered by (k, a)."""
    ks = list(k_range)
    jobs = [(k, Fraction(delta0), h) for k in ks]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_scan_k_rows, jobs))
    else:
        chunks = [_scan_k_rows(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    k_star = _first_stable(rows, lambda r: r["status"] == "ok" and r["passed"])
    bound_first = _first_stable(rows, lambda r: r["bias_bound_margin"] is not None and r["bias_bound_margin"] >= 0)
    return {"delta0": fmt_frac(Fraction(delta0)), "h": h.to_json(), "k_min": ks[0], "k_max": ks[-1],
            "rows": rows, "k_star": k_star, "bias_bound_first_k": bound_first}
