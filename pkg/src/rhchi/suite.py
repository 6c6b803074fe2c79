"""The self-verification suite behind ``selftest``.

Every check compares two exact values computed by different routes and is
recorded, never raised, so one failure does not hide the rest.
"""
from __future__ import annotations

import contextlib
import itertools
import random
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping

from . import builtins, combinat
from .charclass import SheafClass, q_polynomial
from .combinat import (
    delta,
    delta_from_q,
    is_mf,
    lambda_,
    lambda_by_factorizations,
    signed_count,
    signed_count_by_enumeration,
    types_of_weight,
)
from .cover import (
    CoverData,
    SignError,
    check_log_chi,
    check_log_pullback,
    determine_sign,
    rh_lhs,
    rh_rhs_corollary,
    rh_rhs_theorem,
    validate_cover,
)
from .exactring import ChowModel, format_rational
from .geometry import (
    boundary_restriction_check,
    chi_stratum_log,
    euler_vs_log,
    leprim_imprim,
    model_from_dict,
    secondary_induction,
)
from .io import cover_to_file_dict, resolve_cover
from .selfx import admissible_terms, evaluate_terms, expand_full, term_coefficient

__all__ = [
    "CheckRecord",
    "RunReport",
    "REFERENCE_DELTA",
    "REFERENCE_LAMBDA",
    "REFERENCE_Q",
    "REFERENCE_CHAIN",
    "random_sheaf",
    "patched_delta",
    "run_selftest",
    "IDENTITY_MODELS",
]

F = Fraction

REFERENCE_DELTA = {
    (): F(1), (1,): F(1, 2), (2,): F(1, 12), (1, 1): F(1, 4),
    (3,): F(0), (2, 1): F(1, 24), (1, 1, 1): F(1, 8),
}
REFERENCE_LAMBDA = {
    (): F(-1), (1,): F(1, 2), (1, 1): F(-1, 4), (2,): F(1, 12),
    (2, 1): F(0), (3,): F(0), (1, 1, 1): F(1, 8),
}
# Q_4 is known here only up to its x_0 block and the x_1 y_1 y_2 term.
REFERENCE_Q = {
    0: {"x0": F(1)},
    1: {"x0*y1": F(1, 2), "x1": F(1)},
    2: {"x0*y1^2": F(1, 12), "x0*y2": F(1, 12), "x1*y1": F(1, 2), "x1^2": F(1, 2), "x2": F(-1)},
    3: {"x0*y1*y2": F(1, 24), "x1*y1^2": F(1, 12), "x1*y2": F(1, 12), "x1^2*y1": F(1, 4),
        "x2*y1": F(-1, 2), "x1^3": F(1, 6), "x1*x2": F(-1, 2), "x3": F(1, 2)},
    4: {"x0*y1^4": F(-1, 720), "x0*y1^2*y2": F(4, 720), "x0*y1*y3": F(1, 720),
        "x0*y2^2": F(3, 720), "x0*y4": F(-1, 720), "x1*y1*y2": F(1, 24)},
}
REFERENCE_Q_COMPLETE = {0: True, 1: True, 2: True, 3: True, 4: False}
# fresh-label set -> expected (unsigned) coefficient of the quadric-chain rewrite example
REFERENCE_CHAIN = {
    ("E1",): F(1), ("E1", "E3"): F(1, 2), ("E1", "E3", "E7"): F(1, 4), ("E1", "E3", "E4"): F(1, 12),
    ("E2",): F(1), ("E2", "E5"): F(1, 2), ("E2", "E5", "E8"): F(1, 4), ("E2", "E5", "E6"): F(1, 12),
}

IDENTITY_MODELS = ["p1", "p2", "p3", "p1xp1"] + [f"curve{g}" for g in range(builtins.MAX_GENUS + 1)]


def _text(v) -> str:
    if isinstance(v, Fraction):
        return format_rational(v)
    return "" if v is None else str(v)


@dataclass
class CheckRecord:
    group: str
    name: str
    lhs: str
    rhs: str
    ok: bool
    sign: int | None = None


@dataclass
class RunReport:
    records: list[CheckRecord] = field(default_factory=list)
    sign: int | None = None
    seconds: float = 0.0

    def add(self, group: str, name: str, lhs, rhs, ok: bool | None = None, sign: int | None = None):
        if ok is None:
            ok = lhs == rhs
        self.records.append(CheckRecord(group, name, _text(lhs), _text(rhs), bool(ok), sign))

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.records)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.ok]

    def summary(self) -> dict:
        groups: dict[str, list[int]] = {}
        for r in self.records:
            g = groups.setdefault(r.group, [0, 0])
            g[0 if r.ok else 1] += 1
        return {
            "total": len(self.records),
            "passed": sum(1 for r in self.records if r.ok),
            "failed": len(self.failures()),
            "groups": {k: {"passed": v[0], "failed": v[1]} for k, v in sorted(groups.items())},
        }

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "sign": self.sign,
            "summary": self.summary(),
            "checks": [asdict(r) for r in self.records],
        }

    def exit_code(self) -> int:
        return 0 if self.ok else 1


# -- helpers ---------------------------------------------------------------------


def random_sheaf(model: ChowModel, rng: random.Random) -> SheafClass:
    """Rank in 0..3 and Chern classes with small random rational coefficients."""
    chern = []
    for i in range(1, model.dimension + 1):
        raw = {m: Fraction(rng.randint(-4, 4), rng.choice([1, 1, 2, 3])) for m in model.basis(i)}
        chern.append(model.element(raw))
    return SheafClass(rng.randint(0, 3), tuple(chern))


@contextlib.contextmanager
def patched_delta(table: Mapping[tuple[int, ...], Fraction]) -> Iterator[None]:
    """Temporarily override delta on the given monomial types (fault injection)."""
    original = combinat._delta_of_type
    patched = {tuple(sorted(k, reverse=True)): Fraction(v) for k, v in table.items()}

    def fake(t):
        return patched[t] if t in patched else original(t)

    combinat._delta_of_type = fake
    try:
        yield
    finally:
        combinat._delta_of_type = original


def _guard(report: RunReport, group: str, name: str, fn: Callable[[], None]):
    try:
        fn()
    except Exception as exc:  # noqa: BLE001 - a crashing check is a failed check
        report.add(group, name, f"error: {type(exc).__name__}: {exc}", "", ok=False)


# -- check groups ----------------------------------------------------------------


def check_constants(report: RunReport):
    for t, v in REFERENCE_DELTA.items():
        report.add("constants", f"delta{t or (0,)}", delta(t), v)
    for t, v in REFERENCE_LAMBDA.items():
        report.add("constants", f"lambda{t or (0,)}", lambda_(t), v)
    for w in range(1, 7):
        for t in types_of_weight(w):
            report.add("constants", f"delta-via-Q{t}", delta(t), delta_from_q(t))
            report.add("constants", f"lambda-via-factorizations{t}", lambda_(t), lambda_by_factorizations(t))


def check_factorizations(report: RunReport, max_weight: int = 7):
    for w in range(1, max_weight + 1):
        for t in types_of_weight(w):
            fast, slow = signed_count(t), signed_count_by_enumeration(t)
            report.add("factorizations", f"signed-count{t}", fast, slow)
            if is_mf(t):
                expected = (-1) ** (w + 1)
            else:
                # only (b) itself survives when no entry equals 1
                expected = 0 if 1 in t else 1
            report.add("factorizations", f"signed-count-closed{t}", fast, expected)


def check_multiplicativity(report: RunReport, max_weight: int = 7):
    for w in range(2, max_weight + 1):
        for t in types_of_weight(w):
            # every split of the parts into two nonempty groups is a disjoint pair
            for r in range(1, len(t)):
                for left in _splits(t, r):
                    right = list(t)
                    for x in left:
                        right.remove(x)
                    report.add("multiplicativity", f"delta{left}*delta{tuple(right)}",
                               delta(left) * delta(right), delta(t))


def _splits(t, r):
    return sorted({tuple(sorted(c, reverse=True)) for c in itertools.combinations(t, r)})


def check_q_polynomials(report: RunReport):
    for n, expected in REFERENCE_Q.items():
        got = q_polynomial(n)
        if REFERENCE_Q_COMPLETE[n]:
            report.add("q-polynomials", f"Q{n}", _dict_text(got), _dict_text(expected))
        else:
            sub = {k: got.get(k, F(0)) for k in expected}
            x0 = {k: v for k, v in got.items() if k.startswith("x0")}
            expected_x0 = {k: v for k, v in expected.items() if k.startswith("x0")}
            report.add("q-polynomials", f"Q{n}-known-terms", _dict_text(sub), _dict_text(expected))
            report.add("q-polynomials", f"Q{n}-x0-block", _dict_text(x0), _dict_text(expected_x0))


def _dict_text(d: Mapping[str, Fraction]) -> str:
    return ", ".join(f"{k}:{format_rational(v)}" for k, v in sorted(d.items()) if v)


def check_identities(report: RunReport, sheaves_per_arrangement: int = 20, seed: int = 0):
    rng = random.Random(seed)
    for name in IDENTITY_MODELS:
        m = builtins.model(name)
        arrs = builtins.arrangements_for(m)
        sheaves = [SheafClass.trivial()] + [random_sheaf(m, rng) for _ in range(sheaves_per_arrangement - 1)]
        for aname, arr in arrs.items():
            square_free = all((c * c).is_zero() for c in arr.classes)
            bad: dict[str, list] = {"euler-vs-log": [], "leprim-imprim": [], "secondary-induction": []}
            for k, s in enumerate(sheaves):
                for label, fn in (("euler-vs-log", euler_vs_log), ("leprim-imprim", leprim_imprim),
                                  ("secondary-induction", secondary_induction)):
                    if label == "secondary-induction" and not square_free:
                        continue
                    lhs, rhs = fn(m, arr, s)
                    if lhs != rhs:
                        bad[label].append((k, lhs, rhs))
            for label, rows in bad.items():
                if label == "secondary-induction" and not square_free:
                    continue
                if rows:
                    k, lhs, rhs = rows[0]
                    report.add("identities", f"{label}[{name}/{aname}] sheaf#{k}", lhs, rhs, ok=False)
                else:
                    report.add("identities", f"{label}[{name}/{aname}] x{len(sheaves)}",
                               "all equal", "all equal")


def check_boundary_restriction(report: RunReport):
    cases = [
        ("p2", "two-lines", "D1", "p1", {"H": "H"}),
        ("p2", "conic", "D1", "p1", {"H": "2*H"}),
        ("p3", "three-lines", "D2", "p2", {"H": "H"}),
        ("p1xp1", "fibers", "F1", "p1", {"h1": "0", "h2": "H"}),
        ("p1xp1", "diagonal", "D1", "p1", {"h1": "H", "h2": "H"}),
        ("p1", "two-points", "D1", "pt", {"H": "0"}),
        ("curve3", "three-points", "D2", "pt", {"p": "0"}),
    ]
    for mname, aname, label, sname, restr in cases:
        m = builtins.model(mname)
        arr = builtins.arrangement(m, aname)
        ok, rows = boundary_restriction_check(m, arr, label, builtins.model(sname), restr, details=True)
        lhs = "; ".join(format_rational(r[1]) for r in rows)
        rhs = "; ".join(format_rational(r[2]) for r in rows)
        report.add("boundary", f"restriction[{mname}/{aname}/{label}]", lhs, rhs, ok=ok)


def _cover_sheaves(c: CoverData, rng: random.Random, count: int) -> list[SheafClass]:
    return [SheafClass.trivial()] + [random_sheaf(c.codomain, rng) for _ in range(count - 1)]


def check_covers(report: RunReport, sheaves_per_cover: int = 5, seed: int = 1) -> int | None:
    rng = random.Random(seed)
    covers = [builtins.cover(n) for n in builtins.cover_names()]
    sheaves = {c.name: _cover_sheaves(c, rng, sheaves_per_cover) for c in covers}
    for c in covers:
        for chk in validate_cover(c):
            report.add("covers", f"{c.name}:{chk.name}", chk.ok, True, ok=chk.ok)
        ok, rows = check_log_pullback(c)
        report.add("covers", f"{c.name}:log-pullback",
                   "; ".join(str(r[1]) for r in rows), "; ".join(str(r[2]) for r in rows), ok=ok)
        for k, s in enumerate(sheaves[c.name]):
            ok, lhs, rhs = check_log_chi(c, s)
            report.add("covers", f"{c.name}:log-chi sheaf#{k}", lhs, rhs, ok=ok)
    ramified = [builtins.cover(n) for n in builtins.rh_cover_names()]
    sign = None
    try:
        sign = determine_sign(ramified, sheaves)
        report.add("riemann-hurwitz", "unique-sign", sign, sign, sign=sign)
    except SignError as exc:
        report.add("riemann-hurwitz", "unique-sign", f"error: {exc}", "", ok=False)
        return None
    for c in covers:
        for k, s in enumerate(sheaves[c.name]):
            lhs = rh_lhs(c, s)
            report.add("riemann-hurwitz", f"{c.name}:theorem sheaf#{k}", lhs,
                       rh_rhs_theorem(c, s, sign), sign=sign)
            _guard(report, "riemann-hurwitz", f"{c.name}:corollary sheaf#{k}",
                   lambda c=c, s=s, lhs=lhs: report.add(
                       "riemann-hurwitz", f"{c.name}:corollary sheaf#{k}", lhs,
                       rh_rhs_corollary(c, s, sign), sign=sign))
        if all(e == 1 for e in c.indices()):
            for k, s in enumerate(sheaves[c.name]):
                report.add("riemann-hurwitz", f"{c.name}:etale-zero sheaf#{k}", rh_lhs(c, s), 0)
    return sign


def check_selfx(report: RunReport, seed: int = 2):
    rng = random.Random(seed)
    ex = builtins.rewrite_example("quadric-chain")
    n = ex.model.dimension
    terms = expand_full(ex.exponent, ex.arrangement.labels, ex.rules, n)
    got = {t.fresh: abs(t.coefficient) for t in terms}
    report.add("rewrite", "chain:label-sets-and-magnitudes", _tuple_text(got), _tuple_text(REFERENCE_CHAIN))
    for t in terms:
        report.add("rewrite", f"chain:term-coefficient{t.fresh}", t.coefficient, term_coefficient(t.fresh, ex.rules))
    for name in builtins.rewrite_example_names():
        ex = builtins.rewrite_example(name)
        n = ex.model.dimension
        terms = expand_full(ex.exponent, ex.arrangement.labels, ex.rules, n)
        adm = admissible_terms(ex.exponent, ex.arrangement.labels, ex.rules, n)
        report.add("rewrite", f"{name}:admissible", [t.fresh for t in terms], adm)
        for k in range(4):
            s = SheafClass.trivial() if k == 0 else random_sheaf(ex.model, rng)
            lhs = chi_stratum_log(ex.model, ex.arrangement, ex.exponent, s)
            report.add("rewrite", f"{name}:conservation sheaf#{k}", lhs,
                       evaluate_terms(ex.model, ex.arrangement, terms, ex.rules, s))
            report.add("rewrite", f"{name}:conservation-plain sheaf#{k}", lhs,
                       evaluate_terms(ex.model, ex.arrangement, terms, ex.rules, s, plain=True))


def _tuple_text(d) -> str:
    return ", ".join(f"{'.'.join(k)}:{format_rational(v)}" for k, v in sorted(d.items()))


def check_round_trip(report: RunReport):
    for name in builtins.model_names():
        m = builtins.model(name)
        again = model_from_dict(m.to_dict())
        report.add("round-trip", f"model:{name}", again.to_dict() == m.to_dict(), True)
    for name in builtins.cover_names():
        c = builtins.cover(name)
        for inline in (False, True):
            data = cover_to_file_dict(c, inline_models=inline)
            again = resolve_cover(data)
            ok = cover_to_file_dict(again, inline_models=True) == cover_to_file_dict(c, inline_models=True)
            report.add("round-trip", f"cover:{name}{':inline' if inline else ''}", ok, True)


GROUPS: dict[str, Callable[[RunReport], object]] = {
    "constants": check_constants,
    "factorizations": check_factorizations,
    "multiplicativity": check_multiplicativity,
    "q-polynomials": check_q_polynomials,
    "identities": check_identities,
    "boundary": check_boundary_restriction,
    "covers": check_covers,
    "rewrite": check_selfx,
    "round-trip": check_round_trip,
}


def run_selftest(groups=None, delta_faults: Mapping[tuple, Fraction] | None = None) -> RunReport:
    """Run the named check groups (all by default); ``delta_faults`` injects wrong delta values."""
    report = RunReport()
    start = time.perf_counter()
    ctx = patched_delta(delta_faults) if delta_faults else contextlib.nullcontext()
    with ctx:
        for g in groups or GROUPS:
            fn = GROUPS[g]
            try:
                out = fn(report)
            except Exception as exc:  # noqa: BLE001
                report.add(g, "group", f"error: {type(exc).__name__}: {exc}", "", ok=False)
                continue
            if g == "covers":
                report.sign = out
    report.seconds = time.perf_counter() - start
    return report
