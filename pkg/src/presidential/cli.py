"""Command-line entry point: presidential <subcommand> [options]."""
import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import certify as cert
from . import fourier, instance, nopairwise, rounding
from .errors import ConditionFailed, InfeasibleError, PresidentialError
from .predicate import Predicate, from_delta


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _coeff_list(text: str) -> list:
    return [_rational(t) for t in text.split(",") if t.strip()]


# -- output ------------------------------------------------------------------

def plain(obj):
    """JSON-safe copy: rationals as "p/q", non-finite floats as strings, tuple keys joined."""
    if isinstance(obj, Fraction):
        return rounding.fmt_frac(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else ("inf" if f > 0 else "-inf" if f < 0 else "nan")
    if isinstance(obj, dict):
        return {(",".join(map(str, k)) if isinstance(k, tuple) else str(k)): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    return obj


def flatten(d, prefix="") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v, sort_keys=True)
        else:
            out[key] = v
    return out


def render(config: dict, result, fmt: str) -> str:
    result = plain(result)
    config = plain(config)
    if fmt == "json":
        return json.dumps({"config": config, "result": result}, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    if isinstance(result, dict) and isinstance(result.get("rows"), list):
        rows = [flatten(r) for r in result["rows"]]
        rest = {k: v for k, v in result.items() if k != "rows"}
        if rest:
            buf.write("# summary: " + json.dumps(rest, sort_keys=True) + "\n")
    elif isinstance(result, list):
        rows = [flatten(r) for r in result]
    else:
        rows = [flatten(result)]
    cols = []
    for r in rows:
        cols.extend(c for c in r if c not in cols)
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: "" if r.get(c) is None else r.get(c) for c in cols})
    return buf.getvalue()


# -- h selection ---------------------------------------------------------------

def resolve_h(args):
    kind = args.h
    if kind == "cubic":
        return rounding.cubic_h(), None
    if kind == "truncated":
        if args.delta0 is None:
            raise argparse.ArgumentTypeError("--h truncated needs --delta0")
        if args.m is not None:
            return rounding.truncated_h(args.delta0, args.m), None
        return rounding.truncated_h_search(args.delta0, grid_step=args.grid_step)
    if kind == "custom":
        if not args.coeffs:
            raise argparse.ArgumentTypeError("--h custom needs --coeffs a1,a2,...")
        return rounding.RoundingPolynomial.from_power_coeffs([0] + args.coeffs, kind="custom"), None
    raise argparse.ArgumentTypeError(f"unknown h {kind!r}")


def _add_h_options(sp, need_delta0=False):
    sp.add_argument("--h", choices=["cubic", "truncated", "custom"], default="cubic")
    sp.add_argument("--delta0", type=_rational, required=need_delta0)
    sp.add_argument("--m", type=int, help="truncation order for --h truncated (default: searched)")
    sp.add_argument("--coeffs", type=_coeff_list, help="a1,a2,... power coefficients for --h custom")
    sp.add_argument("--grid-step", type=_rational, default=Fraction(1, 1000))


# -- subcommands ---------------------------------------------------------------

def cmd_predicate(args):
    if args.action == "info":
        if args.a is None:
            raise argparse.ArgumentTypeError("predicate info needs --a")
        return Predicate(args.k, args.a).info()
    if args.delta is None:
        raise argparse.ArgumentTypeError("predicate normalize needs --delta")
    return from_delta(args.k, args.delta).info()


def cmd_fourier(args):
    p = Predicate(args.k, args.a)
    tmax = args.tmax if args.tmax is not None else p.k - 1
    table = fourier.exact_table(p, t_max=tmax)
    rows = []
    for kind, t, exact, asym in table.rows(with_asymptotic=args.asymptotic):
        row = {"set": kind, "t": t, "exact": exact, "value": float(exact)}
        if args.asymptotic:
            row["asymptotic"] = asym
        if args.oracle:
            subset = ([1] if kind != "C" else []) + list(range(2, t + 2))
            row["oracle_agrees"] = fourier.brute_force_coeff(p, subset) == exact
        rows.append(row)
    out = {"k": p.k, "a": p.a, "rows": rows, "sign_violations": table.sign_violations}
    if tmax >= p.k - 1:
        out["parseval"] = table.parseval()
    if args.oracle:
        out["oracle_all_agree"] = all(r["oracle_agrees"] for r in rows)
    return out


def cmd_round(args):
    if args.action == "build":
        if args.delta0 is None:
            raise argparse.ArgumentTypeError("round build needs --delta0")
        h, rep = rounding.truncated_h_search(args.delta0, m_hint=args.m, grid_step=args.grid_step)
        return {"h": h.to_json(), "search": rep}
    h, _ = resolve_h(args)
    if args.action == "check-h":
        if args.delta0 is None:
            raise argparse.ArgumentTypeError("round check-h needs --delta0")
        rep = rounding.check_h_conditions(h, args.delta0, args.grid_step)
        rep["h"] = h.to_json()
        if not rep["passed"]:
            return rep, 1
        return rep
    if args.k is None or args.a is None:
        raise argparse.ArgumentTypeError("round eval needs --k and --a")
    s = rounding.build_scheme(Predicate(args.k, args.a), h)
    vals = rounding.vertex_values(s)
    return {"scheme": s.to_json(),
            "rows": [{"x1": x1, "t": t, "V": rounding._to_float(v), "V_exact": v}
                     for (x1, t), v in sorted(vals.items())]}


def cmd_certify(args):
    h, _ = resolve_h(args)
    p = Predicate(args.k, args.a)
    return cert.certify(p, h, delta0=args.delta0, samples=args.samples, support_size=args.support,
                        seed=args.seed)


def cmd_scan(args):
    h, _ = resolve_h(args)
    return cert.scan_k(args.delta0, h, range(args.k_min, args.k_max + 1), threads=args.threads)


def cmd_nopairwise(args):
    p = Predicate(args.k, args.a)
    out = {}
    if p.is_monarchy:
        out["monarchy_check"] = nopairwise.monarchy_check(p.k)
    try:
        s = nopairwise.build_and_solve(p, args.m)
    except InfeasibleError as exc:
        out["error"] = str(exc)
        return out, 1
    out.update(s.to_json())
    out["zero_expectation"] = nopairwise.verify_zero_expectation(s, args.trials, args.seed)
    try:
        alt = nopairwise.build_and_solve(p, args.m, president_sign=-1)
        out["table_sign_variant"] = {"feasible": True, "probabilities": alt.to_json()["probabilities"]}
    except InfeasibleError as exc:
        out["table_sign_variant"] = {"feasible": False, "reason": str(exc)}
    return out


def cmd_instance(args):
    if args.action == "gen":
        if args.k is None or args.a is None:
            raise argparse.ArgumentTypeError("instance gen needs --k and --a")
        inst = instance.generate(Predicate(args.k, args.a), args.n_vars, args.n_clauses, args.eps, args.seed)
        return inst.to_json()
    if not args.file:
        raise argparse.ArgumentTypeError("instance eval needs --file")
    inst = instance.load_instance(args.file)
    h, _ = resolve_h(args)
    s = rounding.build_scheme(inst.predicate, h)
    rep = instance.evaluate_instance(inst, s, repair=args.repair)
    if args.eps_curve:
        eps_values = [Fraction(i, 100) for i in range(11)]
        rep["eps_curve"] = instance.eps_curve(inst.predicate, s, inst.n_vars, len(inst.constraints),
                                              [float(e) for e in eps_values], args.seed)
    return rep


def cmd_hplot(args):
    h, _ = resolve_h(args)
    if args.step <= 0 or args.to < args.start:
        raise argparse.ArgumentTypeError("need step > 0 and --to >= --from")
    n = int((args.to - args.start) / args.step) + 1
    rows = []
    for i in range(n):
        d = args.start + i * args.step
        row = {"Delta": float(d), "h": h.value_float(float(1 + d))}
        if h.delta0 is not None and h.kind == "truncated_exp":
            row["h_exp"] = rounding.exp_h_reference(float(1 + d), h.delta0)
        rows.append(row)
    return {"h": h.to_json(), "rows": rows}


COMMANDS = {"predicate": cmd_predicate, "fourier": cmd_fourier, "round": cmd_round, "certify": cmd_certify,
            "scan": cmd_scan, "nopairwise": cmd_nopairwise, "instance": cmd_instance, "hplot": cmd_hplot}
DEFAULT_FORMAT = {"hplot": "csv", "scan": "csv"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=["json", "csv"])

    ap = argparse.ArgumentParser(prog="presidential", description="Presidential predicate rounding toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("predicate", parents=[common])
    sp.add_argument("action", choices=["info", "normalize"])
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--a", type=int)
    sp.add_argument("--delta", type=_rational)

    sp = sub.add_parser("fourier", parents=[common])
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--tmax", type=int)
    sp.add_argument("--oracle", action="store_true")
    sp.add_argument("--asymptotic", action="store_true")

    sp = sub.add_parser("round", parents=[common])
    sp.add_argument("action", choices=["build", "check-h", "eval"])
    sp.add_argument("--k", type=int)
    sp.add_argument("--a", type=int)
    _add_h_options(sp)

    sp = sub.add_parser("certify", parents=[common])
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--samples", type=int, default=0)
    sp.add_argument("--support", type=int, default=8)
    _add_h_options(sp)

    sp = sub.add_parser("scan", parents=[common])
    sp.add_argument("--k-min", type=int, default=4)
    sp.add_argument("--k-max", type=int, required=True)
    _add_h_options(sp, need_delta0=True)

    sp = sub.add_parser("nopairwise", parents=[common])
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--m", type=int, default=5)
    sp.add_argument("--trials", type=int, default=100)

    sp = sub.add_parser("instance", parents=[common])
    sp.add_argument("action", choices=["gen", "eval"])
    sp.add_argument("--k", type=int)
    sp.add_argument("--a", type=int)
    sp.add_argument("--n-vars", type=int, default=200)
    sp.add_argument("--n-clauses", type=int, default=2000)
    sp.add_argument("--eps", type=float, default=0.0)
    sp.add_argument("--file")
    sp.add_argument("--repair", choices=list(instance.REPAIR_POLICIES), default="min-flip")
    sp.add_argument("--eps-curve", action="store_true")
    _add_h_options(sp)

    sp = sub.add_parser("hplot", parents=[common])
    sp.add_argument("--from", dest="start", type=_rational, default=Fraction(-1))
    sp.add_argument("--to", type=_rational, default=Fraction(3, 2))
    sp.add_argument("--step", type=_rational, default=Fraction(1, 100))
    _add_h_options(sp)
    return ap


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "out"}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = args.format or DEFAULT_FORMAT.get(args.command, "json")
    try:
        result = COMMANDS[args.command](args)
    except argparse.ArgumentTypeError as exc:
        ap.print_usage(sys.stderr)
        print(f"presidential: error: {exc}", file=sys.stderr)
        return 2
    except (ConditionFailed, InfeasibleError) as exc:
        print(f"presidential: {exc}", file=sys.stderr)
        return 1
    except PresidentialError as exc:
        print(f"presidential: error: {exc}", file=sys.stderr)
        return 2
    code = 0
    if isinstance(result, tuple):
        result, code = result
    text = render(_config(args), result, fmt)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
