"""Command-line interface: ``rhchi <subcommand> ...``.

Exit codes: 0 success, 1 a check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import builtins
from .charclass import q_polynomial, q_polynomial_report
from .combinat import delta, lambda_, monomial_type, ordered_factorizations, signed_count, types_of_weight
from .cover import (
    SignError,
    check_log_chi,
    check_log_pullback,
    determine_sign,
    rh_lhs,
    rh_rhs_corollary,
    rh_rhs_theorem,
    rh_terms,
    validate_cover,
)
from .exactring import ModelError, format_rational
from .geometry import (
    ChiConvention,
    chi,
    chi_log,
    chi_stratum_log,
    chi_stratum_plain,
    euler_vs_log,
    leprim_imprim,
)
from .io import resolve_arrangement, resolve_cover, resolve_model, resolve_rules, resolve_sheaf
from .selfx import StuckExpansion, evaluate_terms, expand_full, term_coefficient
from .suite import GROUPS, REFERENCE_DELTA, REFERENCE_LAMBDA, REFERENCE_Q, RunReport, run_selftest

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _parse_ints(text: str) -> tuple[int, ...]:
    text = text.strip().strip("()")
    if not text:
        return ()
    try:
        out = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"malformed exponent {text!r}; expected e.g. 2,1") from None
    if any(x < 0 for x in out):
        raise InputError(f"exponent {text!r} has negative entries")
    return out


class Output:
    """Collects a result dict and renders it as text or JSON."""

    def __init__(self, args):
        self.json = args.json
        self.decimal = args.decimal
        self.data: dict = {}
        self.lines: list[str] = []

    def q(self, v: Fraction) -> str:
        s = format_rational(Fraction(v))
        if self.decimal and Fraction(v).denominator != 1:
            s += f" (approx {float(v):.12g})"
        return s

    def line(self, text: str = ""):
        self.lines.append(text)

    def emit(self):
        if self.json:
            print(json.dumps(self.data, indent=2, sort_keys=True))
        else:
            print("\n".join(self.lines))


# -- constants -----------------------------------------------------------------


def _selector(args) -> list[tuple[int, ...]]:
    if getattr(args, "exponent", None):
        return [_parse_ints(args.exponent)]
    if getattr(args, "type", None):
        return [_parse_ints(args.type)]
    return [t for w in range(0, args.max_weight + 1) for t in types_of_weight(w)]


def _constant_cmd(args, fn, expected, label) -> int:
    out = Output(args)
    rows = []
    ok = True
    for b in _selector(args):
        t = monomial_type(b)
        v = fn(b)
        row = {"exponent": list(b), "type": list(t), "value": format_rational(v)}
        text = f"{label}{tuple(b) if b else (0,)} = {out.q(v)}"
        if args.check and t in expected:
            good = expected[t] == v
            ok &= good
            row["expected"] = format_rational(expected[t])
            row["match"] = good
            text += f"  expected {format_rational(expected[t])} [{'ok' if good else 'MISMATCH'}]"
        rows.append(row)
        out.line(text)
    out.data = {"constant": label, "rows": rows, "ok": ok}
    out.emit()
    return EXIT_OK if ok else EXIT_FAIL


def cmd_delta(args) -> int:
    return _constant_cmd(args, delta, REFERENCE_DELTA, "delta")


def cmd_lambda(args) -> int:
    return _constant_cmd(args, lambda_, REFERENCE_LAMBDA, "lambda")


def cmd_factorizations(args) -> int:
    b = _parse_ints(args.exponent)
    out = Output(args)
    facts = ordered_factorizations(b)
    sc = signed_count(b)
    out.data = {
        "exponent": list(b),
        "factorizations": [[list(p) for p in f] for f in facts],
        "count": len(facts),
        "signed_count": sc,
    }
    if args.list:
        for f in facts:
            out.line(" * ".join(str(p) for p in f) if f else "(empty)")
    out.line(f"count {len(facts)}, signed count {sc}")
    out.emit()
    return EXIT_OK


def cmd_qpoly(args) -> int:
    if not 0 <= args.n <= 4:
        raise InputError("qpoly supports 0 <= n <= 4")
    out = Output(args)
    got = q_polynomial(args.n)
    out.data = {"n": args.n, "text": q_polynomial_report(args.n),
                "terms": {k: format_rational(v) for k, v in got.items()}}
    out.line(f"Q_{args.n} = {q_polynomial_report(args.n)}")
    ok = True
    if args.check:
        expected = REFERENCE_Q[args.n]
        bad = [k for k, v in expected.items() if got.get(k, Fraction(0)) != v]
        ok = not bad
        out.data["match"] = ok
        out.line("reference terms: " + ("all match" if ok else f"MISMATCH at {bad}"))
    out.emit()
    return EXIT_OK if ok else EXIT_FAIL


# -- chi -------------------------------------------------------------------------


def cmd_chi(args) -> int:
    model = resolve_model(args.model)
    arr = resolve_arrangement(args.arrangement, model)
    s = resolve_sheaf(args.sheaf, model)
    conv = ChiConvention(args.convention)
    out = Output(args)
    ok = True
    if args.stratum:
        a = _parse_ints(args.stratum)
        if len(a) != len(arr):
            raise InputError(f"stratum exponent needs {len(arr)} entries")
        value = chi_stratum_plain(model, arr, a, s) if args.plain else chi_stratum_log(model, arr, a, s)
        kind = "stratum-plain" if args.plain else "stratum-log"
    elif args.log:
        value, kind = chi_log(model, arr, s), "log"
    else:
        value, kind = chi(model, s, conv), f"plain-{conv.value}"
    out.data = {"model": model.name, "kind": kind, "value": format_rational(value)}
    out.line(f"chi[{kind}] = {out.q(value)}")
    if args.identities:
        checks = {}
        for name, fn in (("euler-vs-log", euler_vs_log), ("leprim-imprim", leprim_imprim)):
            lhs, rhs = fn(model, arr, s)
            checks[name] = {"lhs": format_rational(lhs), "rhs": format_rational(rhs), "ok": lhs == rhs}
            ok &= lhs == rhs
            out.line(f"{name}: {out.q(lhs)} vs {out.q(rhs)} [{'ok' if lhs == rhs else 'FAIL'}]")
        out.data["identities"] = checks
    out.emit()
    return EXIT_OK if ok else EXIT_FAIL


# -- rh-verify ---------------------------------------------------------------------


def _reference_sign() -> int:
    return determine_sign([builtins.cover(n) for n in builtins.rh_cover_names()])


def cmd_rh(args) -> int:
    c = resolve_cover(args.cover)
    s = resolve_sheaf(args.sheaf, c.codomain)
    out = Output(args)
    report = RunReport()
    for chk in validate_cover(c):
        report.add("validate", chk.name, chk.ok, True, ok=chk.ok)
    ok_pull, _ = check_log_pullback(c)
    report.add("functoriality", "log-pullback", ok_pull, True, ok=ok_pull)
    ok_chi, lchi, rchi = check_log_chi(c, s)
    report.add("functoriality", "log-chi", lchi, rchi, ok=ok_chi)

    sign_source = "given"
    if args.sign == "auto":
        try:
            sign = determine_sign([c], {c.name: [s]})
            sign_source = "this cover"
        except SignError:
            sign = _reference_sign()
            sign_source = "built-in covers"
    else:
        sign = int(args.sign)
    lhs = rh_lhs(c, s)
    thm = rh_rhs_theorem(c, s, sign)
    cor = rh_rhs_corollary(c, s, sign)
    report.add("riemann-hurwitz", "theorem", lhs, thm, sign=sign)
    report.add("riemann-hurwitz", "corollary", lhs, cor, sign=sign)
    terms = rh_terms(c, s, sign)
    report.sign = sign

    out.data = {
        "cover": c.name, "lhs": format_rational(lhs), "theorem_rhs": format_rational(thm),
        "corollary_rhs": format_rational(cor), "sign": sign, "sign_source": sign_source,
        "terms": [{"a": list(r["a"]), "delta": format_rational(r["delta"]), "E": r["E"],
                   "chi_log_stratum": format_rational(r["chi_log_stratum"]),
                   "coefficient": format_rational(r["coefficient"]),
                   "term": format_rational(r["term"])} for r in terms],
        "report": report.to_dict(),
    }
    if args.report == "json":
        out.json = True
    out.line(f"cover {c.name}: degree {c.degree}, dimension {c.dimension}")
    out.line(f"lhs            = {out.q(lhs)}")
    out.line(f"theorem rhs    = {out.q(thm)}")
    out.line(f"corollary rhs  = {out.q(cor)}")
    out.line(f"sign           = {sign:+d} ({sign_source})")
    if terms:
        out.line("a | delta | E | chi_log(R^a) | term")
        for r in terms:
            out.line(f"{r['a']} | {out.q(r['delta'])} | {r['E']} | {out.q(r['chi_log_stratum'])} | {out.q(r['term'])}")
    for rec in report.failures():
        out.line(f"FAIL {rec.group}:{rec.name}: {rec.lhs} vs {rec.rhs}")
    out.line("all checks pass" if report.ok else "some checks FAILED")
    out.emit()
    return report.exit_code()


# -- expand ----------------------------------------------------------------------


def _expand_inputs(args):
    if args.model.startswith("builtin:") and args.model.removeprefix("builtin:") in builtins.rewrite_example_names():
        ex = builtins.rewrite_example(args.model)
        model, arr, a, rules = ex.model, ex.arrangement, ex.exponent, ex.rules
        if args.exponent:
            a = _parse_ints(args.exponent)
        return model, arr, a, rules
    model = resolve_model(args.model)
    if not (args.arrangement and args.exponent and args.rules):
        raise InputError("expand needs --arrangement, --exponent and --rules for a model file")
    arr = resolve_arrangement(args.arrangement, model)
    a = _parse_ints(args.exponent)
    return model, arr, a, resolve_rules(args.rules, arr.labels)


def cmd_expand(args) -> int:
    model, arr, a, rules = _expand_inputs(args)
    if len(a) != len(arr):
        raise InputError(f"exponent needs {len(arr)} entries")
    n = model.dimension
    terms = expand_full(a, arr.labels, rules, n)
    out = Output(args)
    rows = []
    for t in terms:
        rows.append({"base": list(t.base), "fresh": list(t.fresh), "q": t.q,
                     "coefficient": format_rational(t.coefficient),
                     "unsigned": format_rational(term_coefficient(t.fresh, rules, signed=False))})
        out.line(f"{out.q(t.coefficient):>8}  {t.describe(arr.labels)}")
    out.data = {"exponent": list(a), "terms": rows}
    ok = True
    if not args.formal:
        s = resolve_sheaf(args.sheaf, model)
        lhs = chi_stratum_log(model, arr, a, s)
        rhs = evaluate_terms(model, arr, terms, rules, s, plain=args.plain)
        ok = lhs == rhs
        out.data.update({"unexpanded": format_rational(lhs), "expanded": format_rational(rhs), "ok": ok})
        out.line(f"unexpanded {out.q(lhs)}, expanded {out.q(rhs)} [{'ok' if ok else 'FAIL'}]")
    out.emit()
    return EXIT_OK if ok else EXIT_FAIL


# -- selftest --------------------------------------------------------------------


def _parse_fault(text: str) -> tuple[tuple[int, ...], Fraction]:
    try:
        key, value = text.split("=")
        return _parse_ints(key), Fraction(value)
    except ValueError:
        raise InputError(f"malformed fault {text!r}; expected TYPE=VALUE such as 2=1/13") from None


def cmd_selftest(args) -> int:
    faults = dict(_parse_fault(f) for f in args.inject_delta or [])
    report = run_selftest(args.group or None, delta_faults=faults or None)
    out = Output(args)
    out.data = report.to_dict()
    summ = report.summary()
    for g, v in summ["groups"].items():
        out.line(f"{g:<18} passed {v['passed']:>4}  failed {v['failed']}")
    for rec in report.failures():
        out.line(f"FAIL {rec.group}:{rec.name}: {rec.lhs} vs {rec.rhs}")
    out.line(f"sign {report.sign:+d}" if report.sign is not None else "sign undetermined")
    out.line(f"{summ['passed']}/{summ['total']} checks passed in {report.seconds:.1f}s")
    out.emit()
    return report.exit_code()


# -- parser --------------------------------------------------------------------


def _add_globals(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
    p.add_argument("--decimal", action="store_true", default=d(False),
                   help="append decimal approximations (marked approx)")
    p.add_argument("--convention", choices=[c.value for c in ChiConvention], default=d("literal"),
                   help="cotangent convention for plain chi")
    p.add_argument("--sign", choices=["auto", "+1", "-1", "1"], default=d("auto"),
                   help="global sign for the Riemann-Hurwitz theorem")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rhchi", description="Exact logarithmic Euler characteristics and Riemann-Hurwitz checks.")
    _add_globals(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        _add_globals(sp, suppress=True)
        sp.set_defaults(func=fn)
        return sp

    for name, fn in (("delta", cmd_delta), ("lambda", cmd_lambda)):
        sp = add(name, fn, f"{name} constants")
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--type", help="monomial type, e.g. 2,1")
        g.add_argument("--exponent", help="monomial exponent, e.g. 1,0,2")
        sp.add_argument("--max-weight", type=int, default=3, help="table up to this weight")
        sp.add_argument("--check", action="store_true", help="compare against the reference table")

    sp = add("factorizations", cmd_factorizations, "ordered coprime factorizations")
    sp.add_argument("--exponent", required=True)
    sp.add_argument("--list", action="store_true", help="print every factorization")

    sp = add("qpoly", cmd_qpoly, "the universal polynomial Q_n")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--check", action="store_true")

    sp = add("chi", cmd_chi, "Euler characteristics")
    sp.add_argument("model", help="model file or builtin:<name>")
    sp.add_argument("--arrangement", help="arrangement file or builtin:<name>")
    sp.add_argument("--sheaf", help="sheaf file (default: structure sheaf)")
    sp.add_argument("--log", action="store_true", help="logarithmic chi")
    sp.add_argument("--stratum", help="stratum exponent over the arrangement")
    sp.add_argument("--plain", action="store_true", help="plain chi of an MF stratum")
    sp.add_argument("--identities", action="store_true", help="also check the chi vs log-chi identities")

    sp = add("rh-verify", cmd_rh, "verify Riemann-Hurwitz on a cover")
    sp.add_argument("cover", help="cover file or builtin:<name>")
    sp.add_argument("--sheaf", help="sheaf on the codomain")
    sp.add_argument("--report", choices=["text", "json"], default="text")

    sp = add("expand", cmd_expand, "eliminate self-intersections with rewrite rules")
    sp.add_argument("model", help="model file, or builtin:<rewrite example>")
    sp.add_argument("--arrangement")
    sp.add_argument("--exponent")
    sp.add_argument("--rules")
    sp.add_argument("--sheaf")
    sp.add_argument("--formal", action="store_true", help="print the term table only")
    sp.add_argument("--plain", action="store_true", help="evaluate through plain stratum chi")

    sp = add("selftest", cmd_selftest, "run the verification suite")
    sp.add_argument("--group", action="append", choices=list(GROUPS))
    sp.add_argument("--inject-delta", action="append", metavar="TYPE=VALUE", help=argparse.SUPPRESS)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ModelError, StuckExpansion) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
