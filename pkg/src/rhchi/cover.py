"""Ramified covers as ring pullbacks, their validation, and both sides of Riemann-Hurwitz.

A :class:`CoverData` carries the pullback ``pi^*: A(Y) -> A(X)`` as generator
images, the branch arrangement on ``Y``, the ramification arrangement on ``X``
(every component of ``pi^{-1}(B)``, ramified or not), which branch divisor each
ramification divisor lies over, and the ramification indices.  Indices and
component degrees are input data.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .charclass import SheafClass
from .combinat import delta, hat, is_mf, lambda_, monomial_type, sub_exponents
from .exactring import ChowModel, GradedElement, ModelError, all_exponents
from .geometry import (
    Arrangement,
    ChiConvention,
    RingMap,
    chi,
    chi_log,
    chi_stratum_log,
    chi_stratum_plain,
    log_cotangent,
)

__all__ = [
    "CoverError",
    "SignError",
    "ConsistencyError",
    "CoverData",
    "Check",
    "validate_cover",
    "pullback",
    "pullback_sheaf",
    "branch_image",
    "ramification_product",
    "check_log_pullback",
    "check_log_chi",
    "rh_lhs",
    "rh_terms",
    "rh_rhs_theorem",
    "rh_rhs_corollary",
    "corollary_coefficient_raw",
    "simple_mf_coefficient",
    "simple_nmf_coefficient",
    "determine_sign",
    "cover_from_dict",
]


class CoverError(ModelError):
    pass


class SignError(ValueError):
    """No global sign, or more than one, reconciles the theorem with the direct computation."""


class ConsistencyError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class CoverData:
    name: str
    domain: ChowModel
    codomain: ChowModel
    degree: int
    pullback_images: Mapping[str, object]
    branch: Arrangement
    ram: Arrangement
    assignment: Mapping[str, str]
    ram_index: Mapping[str, int]
    component_degrees: Mapping[str, int] | None = None
    morphism: RingMap = field(init=False, repr=False)

    def __post_init__(self):
        X, Y = self.domain, self.codomain
        if X.dimension != Y.dimension:
            raise CoverError("domain and codomain dimensions differ")
        if self.degree < 1:
            raise CoverError("cover degree must be >= 1")
        if self.branch.model is not Y or self.ram.model is not X:
            raise CoverError("branch must live on the codomain and ram on the domain")
        object.__setattr__(self, "morphism", RingMap(Y, X, self.pullback_images))
        for m in Y.basis(Y.dimension):
            img = X.integrate(self.morphism(Y.element({m: 1})))
            if img != self.degree * Y.integrals[m]:
                raise CoverError(
                    f"pullback of {Y.format_monomial(m)} integrates to {img}, expected "
                    f"{self.degree} * {Y.integrals[m]}"
                )
        if set(self.assignment) != set(self.ram.labels):
            raise CoverError("assignment must cover exactly the ramification labels")
        for r, b in self.assignment.items():
            if b not in self.branch.labels:
                raise CoverError(f"ram label {r} assigned to unknown branch label {b}")
        for b in self.branch.labels:
            if b not in self.assignment.values():
                raise CoverError(f"branch label {b} has no preimage")
        if set(self.ram_index) != set(self.ram.labels):
            raise CoverError("ram_index must cover exactly the ramification labels")
        for r, e in self.ram_index.items():
            if int(e) < 1:
                raise CoverError(f"ramification index of {r} is {e} < 1")

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    def indices(self) -> tuple[int, ...]:
        return tuple(int(self.ram_index[r]) for r in self.ram.labels)

    def preimages(self, branch_label: str) -> list[int]:
        return [i for i, r in enumerate(self.ram.labels) if self.assignment[r] == branch_label]


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


def pullback(c: CoverData, e: GradedElement) -> GradedElement:
    return c.morphism(e)


def pullback_sheaf(c: CoverData, s: SheafClass) -> SheafClass:
    return SheafClass(s.rank, tuple(pullback(c, x) for x in s.chern))


def branch_image(c: CoverData, a: Sequence[int]) -> tuple[int, ...]:
    """``pi(a)``: add up ramification exponents over each branch label."""
    out = [0] * len(c.branch)
    for i, r in enumerate(c.ram.labels):
        out[c.branch.index(c.assignment[r])] += a[i]
    return tuple(out)


def ramification_product(c: CoverData, a: Sequence[int]) -> int:
    """``E_{R^a} = prod e_i^{a_i}``; 1 for the empty exponent."""
    out = 1
    for e, x in zip(c.indices(), a):
        out *= e ** x
    return out


def validate_cover(c: CoverData) -> list[Check]:
    X, n = c.domain, c.dimension
    checks: list[Check] = []

    # (i) pi^* B_j = sum e_i R_i
    for j, b in enumerate(c.branch.labels):
        lhs = pullback(c, c.branch.classes[j])
        rhs = X.zero()
        for i in c.preimages(b):
            rhs = rhs + c.ram.classes[i] * c.indices()[i]
        checks.append(Check(f"pullback-branch[{b}]", lhs == rhs, f"{lhs} vs {rhs}"))

    # (ii) distinct components over one branch divisor do not meet
    comp = X.basis(n - 2) if n >= 2 else []
    for b in c.branch.labels:
        for i, j in itertools.combinations(c.preimages(b), 2):
            prod = c.ram.classes[i] * c.ram.classes[j]
            if n < 2:
                ok = True
            else:
                ok = all(X.integrate(prod * X.element({m: 1})) == 0 for m in comp)
            li, lj = c.ram.labels[i], c.ram.labels[j]
            checks.append(Check(f"disjoint-over-branch[{li},{lj}]", ok, str(prod)))

    # (iii) sum mu_Z e_Z = mu
    if c.component_degrees is not None:
        for b in c.branch.labels:
            total = sum(int(c.component_degrees[c.ram.labels[i]]) * c.indices()[i]
                        for i in c.preimages(b))
            checks.append(Check(f"degree-sum[{b}]", total == c.degree, f"{total} vs {c.degree}"))

    # (iv) pi^*(B^b) = sum_{pi(a)=b} E_{R^a} R^a, and R^a = 0 when types differ
    by_image: dict[tuple, list] = {}
    for a in all_exponents(len(c.ram), n, 1):
        by_image.setdefault(branch_image(c, a), []).append(a)
    for b in all_exponents(len(c.branch), n, 1):
        lhs = pullback(c, c.branch.power(b))
        rhs = X.zero()
        for a in by_image.get(b, []):
            rhs = rhs + c.ram.power(a) * ramification_product(c, a)
        checks.append(Check(f"multi-index-pullback[{b}]", lhs == rhs, f"{lhs} vs {rhs}"))
        for a in by_image.get(b, []):
            if monomial_type(a) != monomial_type(b):
                ra = c.ram.power(a)
                checks.append(Check(f"type-mismatch-vanishes[{a}]", ra.is_zero(), str(ra)))
    return checks


def check_log_pullback(c: CoverData) -> tuple[bool, list[tuple[int, GradedElement, GradedElement]]]:
    """``pi^* c_i(Omega_Y log B) = c_i(Omega_X log R)`` for every ``i``; returns the per-degree table."""
    ys = log_cotangent(c.codomain, c.branch)
    xs = log_cotangent(c.domain, c.ram)
    rows = [(i, pullback(c, y), x) for i, (y, x) in enumerate(zip(ys, xs), start=1)]
    return all(p == x for _, p, x in rows), rows


def check_log_chi(c: CoverData, s: SheafClass) -> tuple[bool, Fraction, Fraction]:
    lhs = chi_log(c.domain, c.ram, pullback_sheaf(c, s))
    rhs = c.degree * chi_log(c.codomain, c.branch, s)
    return lhs == rhs, lhs, rhs


def rh_lhs(c: CoverData, s: SheafClass) -> Fraction:
    """``chi(X, pi^* F) - mu chi(Y, F)``, both computed directly (LITERAL)."""
    lit = ChiConvention.LITERAL
    return chi(c.domain, pullback_sheaf(c, s), lit) - c.degree * chi(c.codomain, s, lit)


def rh_terms(c: CoverData, s: SheafClass, sign: int = -1) -> list[dict]:
    """Per-exponent table of the theorem's right-hand side."""
    ps = pullback_sheaf(c, s)
    rows = []
    for a in all_exponents(len(c.ram), c.dimension, 1):
        E = ramification_product(c, a)
        d = delta(a)
        if E == 1 or not d:
            continue
        strat = chi_stratum_log(c.domain, c.ram, a, ps)
        coeff = (-1) ** sum(a) * d * sign * (E - 1)
        rows.append({"a": a, "delta": d, "E": E, "chi_log_stratum": strat,
                     "coefficient": coeff, "term": coeff * strat})
    return rows


def rh_rhs_theorem(c: CoverData, s: SheafClass, sign: int) -> Fraction:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return sum((r["term"] for r in rh_terms(c, s, sign)), Fraction(0))


def corollary_coefficient_raw(c: CoverData, a: Sequence[int]) -> Fraction:
    """The corollary's coefficient from its double sum over ``a' <= a`` (``a' <= hat(a)`` if NMF)."""
    a = tuple(a)
    bound = a if is_mf(a) else hat(a)
    total = Fraction(0) if is_mf(a) else delta(a) * (ramification_product(c, a) - 1)
    for ap in sub_exponents(bound, min_weight=1):
        rest = tuple(x - y for x, y in zip(a, ap))
        total += -lambda_(rest) * delta(ap) * (ramification_product(c, ap) - 1)
    return (-1) ** sum(a) * total


def simple_mf_coefficient(c: CoverData, a: Sequence[int]) -> Fraction:
    """``delta_a prod (1 - e_i)`` over the support of an MF exponent."""
    out = delta(a)
    for e, x in zip(c.indices(), a):
        if x:
            out *= 1 - e
    return out


def simple_nmf_coefficient(c: CoverData, a: Sequence[int]) -> Fraction:
    """``(-1)^|a| delta_a (E_{R^a} - E_{R^hat(a)})``; ``E`` of the empty exponent is 1."""
    return (-1) ** sum(a) * delta(a) * (ramification_product(c, a) - ramification_product(c, hat(a)))


def rh_rhs_corollary(c: CoverData, s: SheafClass, sign: int) -> Fraction:
    """The corollary's two-sum form, after asserting raw and closed-form coefficients agree."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    ps = pullback_sheaf(c, s)
    total = Fraction(0)
    for a in all_exponents(len(c.ram), c.dimension, 1):
        raw = corollary_coefficient_raw(c, a)
        if is_mf(a):
            closed = simple_mf_coefficient(c, a)
        else:
            closed = simple_nmf_coefficient(c, a)
        if raw != closed:
            raise ConsistencyError(f"coefficient of {a}: double sum {raw} != closed form {closed}")
        if not closed:
            continue
        strat = chi_stratum_plain(c.domain, c.ram, a, ps) if is_mf(a) else chi_stratum_log(c.domain, c.ram, a, ps)
        total += sign * closed * strat
    return total


def determine_sign(covers: Iterable[CoverData], sheaves: Mapping[str, Sequence[SheafClass]] | None = None) -> int:
    """The unique ``sign`` with ``rh_rhs_theorem(., ., sign) == rh_lhs`` on every supplied pair.

    ``sheaves`` maps cover names to sheaves on the codomain; the structure sheaf
    is used when a cover has no entry.
    """
    pairs = []
    for c in covers:
        ss = (sheaves or {}).get(c.name) or [SheafClass.trivial()]
        pairs.extend((c, s) for s in ss)
    if not pairs:
        raise SignError("no covers supplied")
    lhs = [rh_lhs(c, s) for c, s in pairs]
    valid = []
    residuals = {}
    for sign in (-1, 1):
        res = [rh_rhs_theorem(c, s, sign) - l for (c, s), l in zip(pairs, lhs)]
        residuals[sign] = res
        if all(r == 0 for r in res):
            valid.append(sign)
    if len(valid) != 1:
        table = ", ".join(
            f"{c.name}: lhs={l} res(-1)={residuals[-1][k]} res(+1)={residuals[1][k]}"
            for k, ((c, _), l) in enumerate(zip(pairs, lhs))
        )
        what = "no sign" if not valid else "both signs"
        raise SignError(f"{what} validates the theorem ({table})")
    return valid[0]


def cover_from_dict(data: Mapping, resolve_model: Callable[[object], ChowModel]) -> CoverData:
    """Build a cover from the JSON layout; models are resolved through ``resolve_model``."""
    try:
        X = resolve_model(data["domain"])
        Y = resolve_model(data["codomain"])
        branch = Arrangement.of(Y, [(d["label"], d["class"]) for d in data.get("branch", [])])
        ram = Arrangement.of(X, [(d["label"], d["class"]) for d in data.get("ram", [])])
        comp = data.get("component_degrees")
        return CoverData(
            name=data.get("name", "cover"),
            domain=X,
            codomain=Y,
            degree=int(data["degree"]),
            pullback_images=dict(data["pullback"]),
            branch=branch,
            ram=ram,
            assignment=dict(data.get("assignment", {})),
            ram_index={k: int(v) for k, v in data.get("ram_index", {}).items()},
            component_degrees={k: int(v) for k, v in comp.items()} if comp else None,
        )
    except (KeyError, TypeError) as exc:
        raise CoverError(f"malformed cover file: {exc}") from exc


def cover_to_dict(c: CoverData, model_ref: Callable[[ChowModel], object]) -> dict:
    out = {
        "name": c.name,
        "domain": model_ref(c.domain),
        "codomain": model_ref(c.codomain),
        "degree": c.degree,
        "pullback": {g: str(img) for g, img in zip(c.codomain.generator_names, c.morphism.images)},
        "branch": c.branch.to_list(),
        "ram": c.ram.to_list(),
        "assignment": dict(c.assignment),
        "ram_index": {k: int(v) for k, v in c.ram_index.items()},
    }
    if c.component_degrees is not None:
        out["component_degrees"] = dict(c.component_degrees)
    return out
