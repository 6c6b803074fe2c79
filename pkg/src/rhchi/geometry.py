"""Variety models, divisor arrangements, logarithmic Chern classes and Euler characteristics.

Conventions: built-in cotangent data uses ``c(Omega^1_{P^n}) = (1 - H)^{n+1}``
truncated, and ``c_1 = (2g - 2) p`` on a genus-g curve.  Euler
characteristics are ``Q_n`` evaluated on those classes (``LITERAL``) or on the
sign-twisted classes ``(-1)^i c_i`` (``TWISTED``, which reproduces the usual
``chi(P^n, O) = 1``).  All comparison identities live in ``LITERAL``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Mapping, Sequence

from .charclass import SheafClass, chern_character, q_value, todd_series
from .combinat import delta, is_mf, lambda_, types_of_weight
from .exactring import (
    ChowModel,
    Generator,
    GradedElement,
    ModelError,
    all_exponents,
    elementary_symmetric,
    invert_unit,
    parse_rational,
)

__all__ = [
    "ChiConvention",
    "Arrangement",
    "build_point",
    "build_projective_space",
    "build_product",
    "build_genus_curve",
    "load_model",
    "model_from_dict",
    "log_cotangent",
    "chi",
    "chi_log",
    "chi_stratum_log",
    "chi_stratum_plain",
    "boundary_restriction_check",
    "euler_vs_log",
    "secondary_induction",
    "leprim_imprim",
    "RingMap",
]


class ChiConvention(enum.Enum):
    LITERAL = "literal"
    TWISTED = "twisted"


@dataclass(frozen=True)
class Arrangement:
    """Labelled degree-1 classes on one model; SNC is the caller's contract."""

    model: ChowModel
    labels: tuple[str, ...]
    classes: tuple[GradedElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "classes", tuple(self.model.element(c) for c in self.classes))
        if len(set(self.labels)) != len(self.labels):
            raise ModelError(f"duplicate arrangement labels {self.labels}")
        if len(self.labels) != len(self.classes):
            raise ModelError("labels and classes differ in length")
        for lab, c in zip(self.labels, self.classes):
            if not c.is_homogeneous(1):
                raise ModelError(f"divisor {lab} = {c} is not of pure degree 1")

    @classmethod
    def of(cls, model: ChowModel, pairs: Sequence[tuple[str, object]] | Mapping[str, object] = ()) -> "Arrangement":
        items = list(pairs.items()) if isinstance(pairs, Mapping) else list(pairs)
        return cls(model, tuple(lab for lab, _ in items), tuple(model.element(c) for _, c in items))

    def __len__(self):
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ModelError(f"no divisor labelled {label!r}") from None

    def class_of(self, label: str) -> GradedElement:
        return self.classes[self.index(label)]

    def power(self, a: Sequence[int]) -> GradedElement:
        """``D^a``."""
        if len(a) != len(self.labels):
            raise ModelError(f"exponent {tuple(a)} does not match {len(self.labels)} labels")
        out = self.model.one()
        for c, e in zip(self.classes, a):
            for _ in range(e):
                out = out * c
        return out

    def boundary_factor(self, skip: frozenset[int] = frozenset()) -> GradedElement:
        """``prod (1 - D_i)`` over labels not in ``skip``."""
        out = self.model.one()
        for i, c in enumerate(self.classes):
            if i not in skip:
                out = out * (1 - c)
        return out

    def extended(self, extra: Sequence[tuple[str, GradedElement]]) -> "Arrangement":
        items = list(zip(self.labels, self.classes)) + list(extra)
        return Arrangement.of(self.model, items)

    def to_list(self) -> list[dict]:
        return [{"label": lab, "class": str(c)} for lab, c in zip(self.labels, self.classes)]

    def elementary(self, k: int) -> GradedElement:
        return elementary_symmetric(list(self.classes), k, self.model)


# -- builders -----------------------------------------------------------------


def build_point() -> ChowModel:
    return ChowModel("pt", 0, [], integrals={(): 1}, cotangent=[])


def build_projective_space(n: int, gen: str = "H") -> ChowModel:
    if n < 1:
        raise ValueError("projective space needs n >= 1")
    cot = [f"{comb(n + 1, i) * (-1) ** i}*{gen}^{i}" for i in range(1, n + 1)]
    return ChowModel(
        f"P{n}", n, [Generator(gen, 1)],
        rules=[(f"{gen}^{n + 1}", 0)],
        integrals={f"{gen}^{n}": 1},
        cotangent=cot,
    )


def build_genus_curve(g: int, gen: str = "p") -> ChowModel:
    if g < 0:
        raise ValueError("genus must be >= 0")
    return ChowModel(
        f"C{g}", 1, [Generator(gen, 1)],
        rules=[(f"{gen}^2", 0)],
        integrals={gen: 1},
        cotangent=[f"{2 * g - 2}*{gen}"],
    )


def _minimal_overflow(model: ChowModel) -> list[tuple[int, ...]]:
    """Monomials of degree > dim all of whose proper divisors have degree <= dim."""
    out = []
    top = model.dimension
    maxd = max(model.degrees, default=1)
    for d in range(top + 1, top + maxd + 1):
        for m in model.monomials(d):
            ok = True
            for i, e in enumerate(m):
                if e and model.monomial_degree(m) - model.degrees[i] > top:
                    ok = False
                    break
            if ok:
                out.append(m)
    return out


def _lift(e: GradedElement, target: ChowModel, offset: int) -> GradedElement:
    width = len(target.generators)
    k = len(e.model.generators)
    raw = {}
    for m, c in e.terms.items():
        full = [0] * width
        full[offset: offset + k] = m
        raw[tuple(full)] = c
    return target.element(raw)


def build_product(m1: ChowModel, m2: ChowModel, names1: Sequence[str] | None = None,
                  names2: Sequence[str] | None = None, name: str | None = None) -> ChowModel:
    """Product model: tensor presentation, split integrals, Whitney-product cotangent."""
    n1 = list(names1) if names1 else list(m1.generator_names)
    n2 = list(names2) if names2 else list(m2.generator_names)
    if set(n1) & set(n2) and not (names1 or names2):
        n1 = [f"{x}1" for x in n1]
        n2 = [f"{x}2" for x in n2]
    gens = [Generator(a, g.degree) for a, g in zip(n1, m1.generators)]
    gens += [Generator(a, g.degree) for a, g in zip(n2, m2.generators)]
    k1, k2 = len(m1.generators), len(m2.generators)

    def pad(m, offset, k):
        full = [0] * (k1 + k2)
        full[offset: offset + k] = m
        return tuple(full)

    rules = []
    for m in _minimal_overflow(m1):
        rules.append((pad(m, 0, k1), 0))
    for m in _minimal_overflow(m2):
        rules.append((pad(m, k1, k2), 0))
    for lhs, rhs in m1.rules:
        rules.append((pad(lhs, 0, k1), {pad(m, 0, k1): c for m, c in rhs.items()}))
    for lhs, rhs in m2.rules:
        rules.append((pad(lhs, k1, k2), {pad(m, k1, k2): c for m, c in rhs.items()}))
    seen = {}
    for lhs, rhs in rules:
        seen.setdefault(lhs, rhs)
    rules = list(seen.items())
    integrals = {}
    for a, va in m1.integrals.items():
        for b, vb in m2.integrals.items():
            integrals[tuple(a) + tuple(b)] = va * vb
    bare = ChowModel(name or f"{m1.name}x{m2.name}", m1.dimension + m2.dimension, gens,
                     rules=rules, integrals=integrals)
    total = _lift(m1.total_cotangent(), bare, 0) * _lift(m2.total_cotangent(), bare, k1)
    cot = [total.degree_part(i) for i in range(1, bare.dimension + 1)]
    return ChowModel(bare.name, bare.dimension, gens, rules=rules, integrals=integrals,
                     cotangent=[str(c) for c in cot])


def model_from_dict(data: Mapping) -> ChowModel:
    try:
        gens = [Generator(g["name"], int(g.get("degree", 1))) for g in data["generators"]]
        rules = [(r["lhs"], r["rhs"]) for r in data.get("rules", [])]
        integrals = {it["monomial"]: parse_rational(str(it["value"])) for it in data["integrals"]}
        return ChowModel(
            data.get("name", "model"), int(data["dimension"]), gens,
            rules=rules, integrals=integrals, cotangent=data.get("cotangent"),
        )
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model file: {exc}") from exc


def load_model(source) -> ChowModel:
    """Load a model from a JSON path, JSON text or an already-parsed mapping."""
    if isinstance(source, Mapping):
        return model_from_dict(source)
    path = Path(source)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model file {source}: {exc}") from exc
    return model_from_dict(data)


# -- characteristic-class computations ------------------------------------------


@lru_cache(maxsize=4096)
def _log_total(arr: Arrangement) -> GradedElement:
    model = arr.model
    factor = arr.boundary_factor()
    total = model.total_cotangent() * invert_unit(factor)
    if total * factor != model.total_cotangent():
        raise ArithmeticError("log Chern classes fail c(Omega) = c(Omega log) * prod(1 - D)")
    return total


def log_cotangent(model: ChowModel, arr: Arrangement) -> tuple[GradedElement, ...]:
    """``c_1..c_n`` of ``Omega^1(log Delta)`` from ``c(Omega) = c(Omega log) prod(1 - D_i)``."""
    if arr.model is not model:
        raise ModelError("arrangement lives on a different model")
    total = _log_total(arr)
    return tuple(total.degree_part(i) for i in range(1, model.dimension + 1))


def _twisted(model: ChowModel) -> list[GradedElement]:
    return [c * (-1) ** i for i, c in enumerate(model.cotangent, start=1)]


def chi(model: ChowModel, s: SheafClass, conv: ChiConvention = ChiConvention.LITERAL) -> Fraction:
    y = list(model.cotangent) if conv is ChiConvention.LITERAL else _twisted(model)
    return q_value(s, y, model)


@lru_cache(maxsize=4096)
def _todd_log(arr: Arrangement) -> GradedElement:
    return todd_series(log_cotangent(arr.model, arr), arr.model)


@lru_cache(maxsize=4096)
def _todd_stratum_plain(arr: Arrangement, supp: frozenset[int]) -> GradedElement:
    model = arr.model
    total = _log_total(arr) * arr.boundary_factor(skip=supp)
    return todd_series([total.degree_part(i) for i in range(1, model.dimension + 1)], model)


@lru_cache(maxsize=4096)
def _ch(s: SheafClass, model: ChowModel) -> GradedElement:
    return chern_character(s, model)


def chi_log(model: ChowModel, arr: Arrangement, s: SheafClass) -> Fraction:
    """Logarithmic Euler characteristic ``Q_n(ch(s); c(Omega log Delta))``."""
    if arr.model is not model:
        raise ModelError("arrangement lives on a different model")
    return model.integrate(_ch(s, model) * _todd_log(arr))


def chi_stratum_log(model: ChowModel, arr: Arrangement, a: Sequence[int], s: SheafClass) -> Fraction:
    """``D^a Q_{n-|a|}(ch(s); c(Omega log Delta))``, integrated; 0 when ``|a| > n``."""
    if sum(a) > model.dimension:
        return Fraction(0)
    return model.integrate(arr.power(a) * _ch(s, model) * _todd_log(arr))


def chi_stratum_plain(model: ChowModel, arr: Arrangement, a: Sequence[int], s: SheafClass) -> Fraction:
    """Plain Euler characteristic of the MF stratum ``D^a``, computed in the ambient ring.

    The stratum's cotangent classes are ``c(Omega log Delta)`` restricted, times
    ``(1 - D_i)`` for every divisor not containing the stratum.
    """
    if not is_mf(a):
        raise ValueError(f"stratum exponent {tuple(a)} is not multiplicity free")
    if sum(a) > model.dimension:
        return Fraction(0)
    supp = frozenset(i for i, x in enumerate(a) if x)
    return model.integrate(arr.power(a) * _ch(s, model) * _todd_stratum_plain(arr, supp))


# -- boundary restriction -----------------------------------------------------


class RingMap:
    """A degree-preserving ring morphism given by generator images."""

    def __init__(self, source: ChowModel, target: ChowModel, images: Mapping[str, object]):
        self.source = source
        self.target = target
        missing = set(source.generator_names) - set(images)
        if missing:
            raise ModelError(f"no image for generators {sorted(missing)}")
        self.images = tuple(target.element(images[g]) for g in source.generator_names)
        for g, img in zip(source.generators, self.images):
            if not img.is_homogeneous(g.degree):
                raise ModelError(f"image of {g.name} is not of degree {g.degree}")
        self._cache: dict = {}
        for lhs, rhs in source.rules:
            if self._monomial(lhs) != self._raw(rhs):
                raise ModelError(
                    f"incompatible correspondence: rule {source.format_monomial(lhs)} not respected"
                )

    def _monomial(self, m) -> GradedElement:
        hit = self._cache.get(m)
        if hit is None:
            hit = self.target.one()
            for img, e in zip(self.images, m):
                for _ in range(e):
                    hit = hit * img
            self._cache[m] = hit
        return hit

    def _raw(self, terms) -> GradedElement:
        out = self.target.zero()
        for m, c in terms.items():
            out = out + self._monomial(m) * c
        return out

    def __call__(self, e: GradedElement) -> GradedElement:
        if e.model is not self.source:
            raise ModelError("element is not in the source model")
        return self._raw(e.terms)


def _partitions_as_lists(m: int) -> list[tuple[int, ...]]:
    return types_of_weight(m)


def boundary_restriction_check(model: ChowModel, arr: Arrangement, label: str,
                               stratum: ChowModel, restriction: Mapping[str, object],
                               *, details: bool = False):
    """Compare ``int_X c^alpha(Omega log Delta) D`` with ``int_D c^alpha(Omega_D log Delta')``.

    ``restriction`` sends ambient generators to stratum classes.  Every partition
    ``alpha`` of ``n - 1`` is checked; returns the conjunction (or the per-partition
    table when ``details``).
    """
    if stratum.dimension != model.dimension - 1:
        raise ModelError("stratum model must have dimension n - 1")
    rmap = RingMap(model, stratum, restriction)
    idx = arr.index(label)
    d = arr.classes[idx]
    others = [(lab, rmap(c)) for i, (lab, c) in enumerate(zip(arr.labels, arr.classes)) if i != idx]
    arr_s = Arrangement.of(stratum, others)
    cx = log_cotangent(model, arr)
    cs = log_cotangent(stratum, arr_s)
    rows = []
    for alpha in _partitions_as_lists(model.dimension - 1):
        lx = model.one()
        ls = stratum.one()
        for part in alpha:
            lx = lx * cx[part - 1]
            ls = ls * cs[part - 1]
        lhs = model.integrate(lx * d)
        rhs = stratum.integrate(ls)
        rows.append((alpha, lhs, rhs, lhs == rhs))
    ok = all(r[3] for r in rows)
    return (ok, rows) if details else ok


# -- comparison identities ----------------------------------------------------


def _exponents(arr: Arrangement, n: int, min_weight: int = 1):
    return all_exponents(len(arr), n, min_weight)


def euler_vs_log(model: ChowModel, arr: Arrangement, s: SheafClass) -> tuple[Fraction, Fraction]:
    """Both sides of ``chi - chi_log = sum_{|b|>=1} (-1)^|b| delta_b chi(D^b, Delta', s)``."""
    lhs = chi(model, s) - chi_log(model, arr, s)
    rhs = Fraction(0)
    for b in _exponents(arr, model.dimension):
        d = delta(b)
        if d:
            rhs += (-1) ** sum(b) * d * chi_stratum_log(model, arr, b, s)
    return lhs, rhs


def secondary_induction(model: ChowModel, arr: Arrangement, s: SheafClass) -> tuple[Fraction, Fraction]:
    """Both sides of the MF-only expansion valid when every ``D_i^2 = 0``."""
    for lab, c in zip(arr.labels, arr.classes):
        if not (c * c).is_zero():
            raise ValueError(f"divisor {lab} has nonzero self-intersection")
    lhs = chi(model, s) - chi_log(model, arr, s)
    rhs = Fraction(0)
    for b in _exponents(arr, model.dimension):
        if is_mf(b):
            rhs += (-1) ** sum(b) * lambda_(b) * chi_stratum_plain(model, arr, b, s)
    return lhs, rhs


def leprim_imprim(model: ChowModel, arr: Arrangement, s: SheafClass) -> tuple[Fraction, Fraction]:
    """Both sides with MF strata as plain chi and NMF strata as log chi."""
    lhs = chi(model, s) - chi_log(model, arr, s)
    rhs = Fraction(0)
    for b in _exponents(arr, model.dimension):
        lam = lambda_(b)
        if not lam:
            continue
        if is_mf(b):
            rhs += (-1) ** sum(b) * lam * chi_stratum_plain(model, arr, b, s)
        else:
            rhs += (-1) ** sum(b) * lam * chi_stratum_log(model, arr, b, s)
    return lhs, rhs
