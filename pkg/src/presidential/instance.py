"""Planted CSP(P) instances and an end-to-end evaluation harness.

No relaxation is solved here.  Each constraint is mapped to the vertex of
its planted literal pattern (repaired minimally when corrupted), and the
scheme's V is averaged over those vertices.  The resulting satisfaction
figure is a proxy, not the output of an actual rounding sampler.
"""
from dataclasses import dataclass
import json
import math

import numpy as np

from .errors import ParamError
from .ktw import KtwPoint, random_satisfying, vertex_point
from .predicate import Predicate
from .rounding import Scheme, _to_float, fmt_frac, vertex_values

PROXY_CAVEAT = ("proxy = 1/2 + epsilon_scale * avg V / 2 over planted-literal vertices; "
                "no relaxation is solved and no rounding sampler is run")
REPAIR_POLICIES = ("min-flip", "skip")


@dataclass
class Instance:
    n_vars: int
    k: int
    a: int
    constraints: list        # (vars tuple, signs tuple)
    planted: tuple
    eps: float = 0.0

    @property
    def predicate(self) -> Predicate:
        return Predicate(self.k, self.a)

    def literals(self, idx: int) -> tuple:
        vs, zs = self.constraints[idx]
        return tuple(z * self.planted[v] for v, z in zip(vs, zs))

    def planted_satisfied(self) -> int:
        p = self.predicate
        return sum(p.evaluate(self.literals(i)) == 1 for i in range(len(self.constraints)))

    def to_json(self) -> dict:
        return {"n_vars": self.n_vars, "k": self.k, "a": self.a, "eps": self.eps,
                "planted": list(self.planted),
                "clauses": [{"vars": list(v), "signs": list(z)} for v, z in self.constraints]}

    @classmethod
    def from_json(cls, d: dict) -> "Instance":
        cons = [(tuple(int(v) for v in c["vars"]), tuple(int(z) for z in c["signs"])) for c in d["clauses"]]
        inst = cls(int(d["n_vars"]), int(d["k"]), int(d["a"]), cons,
                   tuple(int(y) for y in d["planted"]), float(d.get("eps", 0.0)))
        inst.validate()
        return inst

    def validate(self):
        if len(self.planted) != self.n_vars or any(y not in (-1, 1) for y in self.planted):
            raise ParamError("planted assignment must be a ±1 vector of length n_vars")
        for vs, zs in self.constraints:
            if len(vs) != self.k or len(set(vs)) != self.k or len(zs) != self.k:
                raise ParamError("each clause needs k distinct variables and k signs")
            if any(not 0 <= v < self.n_vars for v in vs) or any(z not in (-1, 1) for z in zs):
                raise ParamError("clause variable or sign out of range")


def load_instance(path) -> Instance:
    with open(path) as fh:
        d = json.load(fh)
    if "clauses" not in d and isinstance(d.get("result"), dict):
        d = d["result"]     # file written by the CLI, with its config header
    return Instance.from_json(d)


def generate(p: Predicate, n_vars: int, n_clauses: int, eps: float = 0.0, seed: int = 0) -> Instance:
    """Planted instance where exactly round(eps * n_clauses) clauses get random signs.

    Random draws happen in the same order for every eps, so instances with
    one seed and different eps share their planted assignment and clean
    clauses.
    """
    if n_vars < p.k:
        raise ParamError(f"n_vars={n_vars} must be at least k={p.k}")
    if n_clauses < 0 or not 0 <= eps <= 1:
        raise ParamError("n_clauses must be nonnegative and eps in [0, 1]")
    rng = np.random.default_rng(seed)
    planted = tuple(int(y) for y in rng.choice(np.array([-1, 1]), size=n_vars))
    order = rng.permutation(n_clauses)
    corrupted = set(int(i) for i in order[:round(eps * n_clauses)])
    cons = []
    for i in range(n_clauses):
        vs = tuple(int(v) for v in rng.choice(n_vars, size=p.k, replace=False))
        w = random_satisfying(p, rng)
        noise = tuple(int(v) for v in rng.choice(np.array([-1, 1]), size=p.k))
        if i in corrupted:
            w = noise
        cons.append((vs, tuple(wj * planted[v] for wj, v in zip(w, vs))))
    return Instance(n_vars, p.k, p.a, cons, planted, float(eps))


def repair_literals(p: Predicate, w) -> tuple:
    """Fewest flips of -1 literals that satisfy P; citizens-only wins ties, lowest index first."""
    w = list(w)
    margin = p.margin(w[0], sum(1 for v in w[1:] if v == 1))
    if margin >= 1:
        return tuple(w)
    minus = [i for i in range(1, p.k) if w[i] == -1]
    need = math.ceil((1 - margin) / 2)          # each citizen flip adds 2
    options = []
    if need <= len(minus):
        options.append((need, 0, False))
    if w[0] == -1:
        rest = max(0, math.ceil((1 - margin - 2 * p.a) / 2))
        if rest <= len(minus):
            options.append((rest + 1, 1, True))
    count, _, flip_president = min(options)
    if flip_president:
        w[0] = 1
        count -= 1
    for i in minus[:count]:
        w[i] = 1
    assert p.evaluate(w) == 1
    return tuple(w)


def constraint_point(inst: Instance, idx: int, repair: str = "min-flip"):
    """Vertex of clause idx's literal pattern; violated clauses are repaired or skipped (None)."""
    if repair not in REPAIR_POLICIES:
        raise ParamError(f"unknown repair policy {repair!r}")
    p = inst.predicate
    w = inst.literals(idx)
    if p.evaluate(w) == 1:
        return vertex_point(w)
    if repair == "skip":
        return None
    return vertex_point(repair_literals(p, w))


def evaluate_instance(inst: Instance, s: Scheme, repair: str = "min-flip") -> dict:
    if (s.k, s.a) != (inst.k, inst.a):
        raise ParamError("scheme and instance predicates differ")
    vals = vertex_values(s)
    got = []
    repaired = skipped = 0
    for i in range(len(inst.constraints)):
        pt = constraint_point(inst, i, repair)
        if pt is None:
            skipped += 1
            continue
        if pt.b != tuple(inst.literals(i)):
            repaired += 1
        x1 = pt.b[0]
        t = sum(1 for v in pt.b[1:] if v == 1)
        got.append(vals[(x1, t)])
    if not got:
        raise ParamError("no constraint points to evaluate")
    avg = sum(got) / len(got)
    return {
        "n_constraints": len(inst.constraints),
        "evaluated": len(got),
        "repaired": repaired,
        "skipped": skipped,
        "planted_satisfied_fraction": inst.planted_satisfied() / max(1, len(inst.constraints)),
        "avg_V": _to_float(avg),
        "avg_V_exact": fmt_frac(avg),
        "min_V": _to_float(min(got)),
        "epsilon_scale": _to_float(s.epsilon_scale),
        "proxy": _to_float(1 / 2 + s.epsilon_scale * avg / 2),
        "caveat": PROXY_CAVEAT,
    }


def eps_curve(p: Predicate, s: Scheme, n_vars: int, n_clauses: int, eps_values, seed: int = 0) -> list:
    rows = []
    for eps in eps_values:
        rep = evaluate_instance(generate(p, n_vars, n_clauses, eps, seed), s)
        rows.append({"eps": eps, "avg_V": rep["avg_V"], "min_V": rep["min_V"], "proxy": rep["proxy"],
                     "planted_satisfied_fraction": rep["planted_satisfied_fraction"]})
    return rows
