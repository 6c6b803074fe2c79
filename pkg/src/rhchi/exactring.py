"""Truncated graded commutative algebra over the rationals.

A :class:`ChowModel` is a presented graded ring: generators with positive
degrees, an ordered list of rewrite rules ``monomial -> polynomial``, a top
degree ``dimension`` above which everything vanishes, and an integration
functional on the top degree.  A :class:`GradedElement` is a sparse mapping
from normal-form monomials (exponent tuples) to :class:`fractions.Fraction`.

All arithmetic is exact.
"""
from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

Rational = Fraction
Monomial = tuple

__all__ = [
    "Rational",
    "Generator",
    "ChowModel",
    "GradedElement",
    "ModelError",
    "IncompleteModelError",
    "NonTerminatingError",
    "NotAUnitError",
    "normalize",
    "invert_unit",
    "integrate",
    "elementary_symmetric",
    "parse_rational",
    "format_rational",
]


class ModelError(ValueError):
    """A model presentation failed validation."""


class IncompleteModelError(ModelError):
    """A top-degree normal-form monomial has no integral value."""


class NonTerminatingError(ModelError):
    """Rule application exceeded the step budget."""


class NotAUnitError(ArithmeticError):
    pass


def parse_rational(text) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        return Fraction(text.strip().replace("−", "-"))
    raise TypeError(f"cannot read {text!r} as an exact rational")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int = 1

    def __post_init__(self):
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", self.name):
            raise ModelError(f"bad generator name {self.name!r}")
        if int(self.degree) < 1:
            raise ModelError(f"generator {self.name} has degree {self.degree} < 1")


_TERM_SPLIT = re.compile(r"\s*([+-])\s*")
_RATIONAL = re.compile(r"^\d+(?:/\d+)?$")
_DOUBLE_SIGN = re.compile(r"([+-])\s*([+-])")


def _split_terms(text: str) -> list[tuple[int, str]]:
    text = text.replace("−", "-").strip()
    if not text:
        raise ValueError("empty polynomial text")
    text = _DOUBLE_SIGN.sub(lambda m: "-" if m.group(1) != m.group(2) else "+", text)
    if text[0] not in "+-":
        text = "+" + text
    parts = _TERM_SPLIT.split(text)
    # parts: ['', sign, term, sign, term, ...]
    if parts[0].strip():
        raise ValueError(f"cannot parse polynomial {text!r}")
    out = []
    for sign, body in zip(parts[1::2], parts[2::2]):
        body = body.strip()
        if not body:
            raise ValueError(f"dangling sign in {text!r}")
        out.append((1 if sign == "+" else -1, body))
    return out


class ChowModel:
    """A presented graded ring truncated above ``dimension``.

    ``rules`` is an ordered sequence of ``(lhs, rhs)`` pairs; ``lhs`` is a
    monomial (text such as ``"H^3"`` or an exponent tuple) and ``rhs`` is any
    polynomial input accepted by :meth:`raw`.  ``integrals`` maps top-degree
    normal-form monomials to rationals; ``None`` builds a free model with no
    integration functional (used for universal-polynomial bookkeeping).
    ``cotangent`` lists the Chern classes ``c_1 .. c_n`` of the cotangent
    bundle.
    """

    def __init__(
        self,
        name: str,
        dimension: int,
        generators: Sequence[Generator | tuple[str, int]],
        rules: Sequence[tuple] = (),
        integrals: Mapping | None = None,
        cotangent: Sequence | None = None,
        *,
        step_budget: int = 100_000,
        validate: bool = True,
    ):
        if dimension < 0:
            raise ModelError("dimension must be >= 0")
        self.name = name
        self.dimension = int(dimension)
        gens = []
        for g in generators:
            gens.append(g if isinstance(g, Generator) else Generator(*g))
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise ModelError(f"duplicate generator names in {names}")
        self.generators: tuple[Generator, ...] = tuple(gens)
        self.degrees: tuple[int, ...] = tuple(int(g.degree) for g in gens)
        self._index = {g.name: i for i, g in enumerate(gens)}
        self.step_budget = step_budget
        self._cache: dict[Monomial, dict[Monomial, Fraction]] = {}
        self._lock = threading.Lock()

        parsed_rules = []
        for lhs, rhs in rules:
            lhs_m = self._monomial(lhs)
            rhs_raw = self.raw(rhs)
            dl = self.monomial_degree(lhs_m)
            for m in rhs_raw:
                if self.monomial_degree(m) != dl:
                    raise ModelError(
                        f"rule {self.format_monomial(lhs_m)} -> {rhs!r} is not degree-homogeneous"
                    )
            if sum(lhs_m) == 0:
                raise ModelError("rule with constant left-hand side")
            parsed_rules.append((lhs_m, rhs_raw))
        self.rules: tuple[tuple[Monomial, dict], ...] = tuple(parsed_rules)

        if integrals is None:
            self.integrals = None
        else:
            self.integrals = {self._monomial(k): parse_rational(v) for k, v in dict(integrals).items()}

        if validate:
            self._check_rules()
            self._check_integrals()

        if cotangent is None:
            self.cotangent = tuple(self.zero() for _ in range(self.dimension))
        else:
            cot = [self.element(c) for c in cotangent]
            if len(cot) != self.dimension:
                raise ModelError(f"cotangent needs {self.dimension} classes, got {len(cot)}")
            for i, c in enumerate(cot, start=1):
                if not c.is_homogeneous(i):
                    raise ModelError(f"cotangent class c_{i} is not of pure degree {i}")
            self.cotangent = tuple(cot)

    # -- monomials ---------------------------------------------------------

    @property
    def generator_names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.generators)

    @property
    def unit_monomial(self) -> Monomial:
        return (0,) * len(self.generators)

    def monomial_degree(self, m: Monomial) -> int:
        return sum(e * d for e, d in zip(m, self.degrees))

    def gen_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown generator {name!r} in model {self.name}") from None

    def _monomial(self, m) -> Monomial:
        if isinstance(m, tuple):
            if len(m) != len(self.generators) or any(int(e) < 0 for e in m):
                raise ModelError(f"bad exponent tuple {m!r}")
            return tuple(int(e) for e in m)
        if isinstance(m, str):
            coeff, mono = self._parse_term(m)
            if coeff != 1:
                raise ModelError(f"expected a bare monomial, got {m!r}")
            return mono
        raise TypeError(f"cannot read {m!r} as a monomial")

    def _parse_term(self, body: str) -> tuple[Fraction, Monomial]:
        exps = [0] * len(self.generators)
        coeff = Fraction(1)
        factors = [f.strip() for f in body.split("*")]
        for f in factors:
            if not f:
                raise ModelError(f"empty factor in term {body!r}")
            if _RATIONAL.match(f):
                coeff *= Fraction(f)
                continue
            name, _, power = f.partition("^")
            name = name.strip()
            k = int(power) if power else 1
            if k < 0:
                raise ModelError(f"negative power in {body!r}")
            exps[self.gen_index(name)] += k
        return coeff, tuple(exps)

    def monomials(self, degree: int) -> Iterator[Monomial]:
        """All exponent tuples of the given weighted degree (not reduced)."""
        ng = len(self.generators)

        def rec(i, remaining):
            if i == ng:
                if remaining == 0:
                    yield ()
                return
            d = self.degrees[i]
            for e in range(remaining // d + 1):
                for rest in rec(i + 1, remaining - e * d):
                    yield (e,) + rest

        yield from rec(0, degree)

    def basis(self, degree: int) -> list[Monomial]:
        """Normal-form monomials of the given degree (irreducible under the rules)."""
        if degree > self.dimension:
            return []
        return [m for m in self.monomials(degree) if self._first_rule(m) is None]

    def format_monomial(self, m: Monomial) -> str:
        parts = []
        for g, e in zip(self.generators, m):
            if e == 1:
                parts.append(g.name)
            elif e > 1:
                parts.append(f"{g.name}^{e}")
        return "*".join(parts) if parts else "1"

    # -- reduction ---------------------------------------------------------

    def _first_rule(self, m: Monomial):
        for lhs, rhs in self.rules:
            if all(a >= b for a, b in zip(m, lhs)):
                return lhs, rhs
        return None

    def _reduce(self, m: Monomial, budget: list[int]) -> dict[Monomial, Fraction]:
        if self.monomial_degree(m) > self.dimension:
            return {}
        hit = self._cache.get(m)
        if hit is not None:
            return hit
        budget[0] -= 1
        if budget[0] < 0:
            raise NonTerminatingError(
                f"rule application in model {self.name} exceeded {self.step_budget} steps"
            )
        rule = self._first_rule(m)
        if rule is None:
            out = {m: Fraction(1)}
        else:
            lhs, rhs = rule
            quot = tuple(a - b for a, b in zip(m, lhs))
            out = {}
            for rm, rc in rhs.items():
                target = tuple(a + b for a, b in zip(quot, rm))
                for nm, nc in self._reduce(target, budget).items():
                    out[nm] = out.get(nm, 0) + rc * nc
            out = {k: v for k, v in out.items() if v}
        with self._lock:
            self._cache[m] = out
        return out

    def reduce_monomial(self, m: Monomial) -> dict[Monomial, Fraction]:
        return self._reduce(m, [self.step_budget])

    def _check_rules(self):
        """Termination and local confluence over every monomial up to the top degree."""
        for d in range(1, self.dimension + 1):
            for m in self.monomials(d):
                nf = self.reduce_monomial(m)
                for lhs, rhs in self.rules:
                    if not all(a >= b for a, b in zip(m, lhs)):
                        continue
                    quot = tuple(a - b for a, b in zip(m, lhs))
                    alt: dict[Monomial, Fraction] = {}
                    for rm, rc in rhs.items():
                        target = tuple(a + b for a, b in zip(quot, rm))
                        for nm, nc in self.reduce_monomial(target).items():
                            alt[nm] = alt.get(nm, 0) + rc * nc
                    alt = {k: v for k, v in alt.items() if v}
                    if alt != nf:
                        raise ModelError(
                            f"rules of model {self.name} are not confluent at "
                            f"{self.format_monomial(m)} (rule on {self.format_monomial(lhs)})"
                        )

    def _check_integrals(self):
        if self.integrals is None:
            return
        top = set(self.basis(self.dimension))
        for m in self.integrals:
            if self.monomial_degree(m) != self.dimension:
                raise ModelError(f"integral given for non-top monomial {self.format_monomial(m)}")
            if m not in top:
                raise ModelError(f"integral given for reducible monomial {self.format_monomial(m)}")
        missing = [m for m in top if m not in self.integrals]
        if missing:
            raise IncompleteModelError(
                f"model {self.name} lacks integrals for "
                + ", ".join(self.format_monomial(m) for m in missing)
            )

    # -- elements ----------------------------------------------------------

    def raw(self, poly) -> dict[Monomial, Fraction]:
        """Parse polynomial input into an unreduced monomial -> coefficient dict."""
        if isinstance(poly, GradedElement):
            if poly.model is not self:
                raise ModelError("element belongs to a different model")
            return dict(poly.terms)
        if isinstance(poly, (int, Fraction)):
            return {self.unit_monomial: Fraction(poly)} if poly else {}
        if isinstance(poly, Mapping):
            out: dict[Monomial, Fraction] = {}
            for k, v in poly.items():
                m = self._monomial(k)
                out[m] = out.get(m, 0) + parse_rational(v)
            return {k: v for k, v in out.items() if v}
        if isinstance(poly, str):
            out = {}
            for sign, body in _split_terms(poly):
                c, m = self._parse_term(body)
                out[m] = out.get(m, 0) + sign * c
            return {k: v for k, v in out.items() if v}
        raise TypeError(f"cannot read {poly!r} as a polynomial")

    def element(self, poly) -> "GradedElement":
        if isinstance(poly, GradedElement) and poly.model is self:
            return poly
        return normalize(self.raw(poly), self)

    def gen(self, name: str) -> "GradedElement":
        m = [0] * len(self.generators)
        m[self.gen_index(name)] = 1
        return normalize({tuple(m): Fraction(1)}, self)

    def gens(self) -> tuple["GradedElement", ...]:
        return tuple(self.gen(g.name) for g in self.generators)

    def one(self) -> "GradedElement":
        return GradedElement._make({self.unit_monomial: Fraction(1)}, self)

    def zero(self) -> "GradedElement":
        return GradedElement._make({}, self)

    def integrate(self, e: "GradedElement") -> Fraction:
        return integrate(e, self)

    def total_cotangent(self) -> "GradedElement":
        out = self.one()
        for c in self.cotangent:
            out = out + c
        return out

    def to_dict(self) -> dict:
        """Serialize to the JSON model-file layout."""
        if self.integrals is None:
            raise ModelError("free models have no file representation")
        return {
            "name": self.name,
            "dimension": self.dimension,
            "generators": [{"name": g.name, "degree": g.degree} for g in self.generators],
            "rules": [
                {"lhs": self.format_monomial(lhs), "rhs": _format_raw(self, rhs) if rhs else "0"}
                for lhs, rhs in self.rules
            ],
            "integrals": [
                {"monomial": self.format_monomial(m), "value": format_rational(v)}
                for m, v in sorted(self.integrals.items())
            ],
            "cotangent": [str(c) for c in self.cotangent],
        }

    def __repr__(self):
        return f"ChowModel({self.name!r}, dim={self.dimension}, gens={list(self.generator_names)})"


def _format_raw(model: ChowModel, terms: Mapping[Monomial, Fraction]) -> str:
    if not terms:
        return "0"

    def key(item):
        m = item[0]
        return (model.monomial_degree(m), tuple(-e for e in m))

    out = []
    for m, c in sorted(terms.items(), key=key):
        mono = model.format_monomial(m)
        mag = abs(c)
        if mono == "1":
            body = format_rational(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{format_rational(mag)}*{mono}"
        if not out:
            out.append(body if c > 0 else f"-{body}")
        else:
            out.append(("+ " if c > 0 else "- ") + body)
    return " ".join(out)


class GradedElement:
    """An immutable element of a :class:`ChowModel`, always in normal form."""

    __slots__ = ("terms", "model")

    def __init__(self, raw, model: ChowModel):
        reduced = normalize(raw, model) if not isinstance(raw, GradedElement) else raw
        object.__setattr__(self, "terms", reduced.terms)
        object.__setattr__(self, "model", model)

    @classmethod
    def _make(cls, terms: dict, model: ChowModel) -> "GradedElement":
        obj = object.__new__(cls)
        object.__setattr__(obj, "terms", terms)
        object.__setattr__(obj, "model", model)
        return obj

    def __setattr__(self, *_):
        raise AttributeError("GradedElement is immutable")

    def _coerce(self, other) -> "GradedElement":
        if isinstance(other, GradedElement):
            if other.model is not self.model:
                raise ModelError("cannot combine elements of different models")
            return other
        if isinstance(other, (int, Fraction)):
            return GradedElement._make(
                {self.model.unit_monomial: Fraction(other)} if other else {}, self.model
            )
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return GradedElement._make(out, self.model)

    __radd__ = __add__

    def __neg__(self):
        return GradedElement._make({m: -c for m, c in self.terms.items()}, self.model)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return self.model.zero()
            return GradedElement._make({m: c * other for m, c in self.terms.items()}, self.model)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        model = self.model
        out: dict[Monomial, Fraction] = {}
        n = model.dimension
        deg = model.monomial_degree
        for m1, c1 in self.terms.items():
            d1 = deg(m1)
            for m2, c2 in other.terms.items():
                if d1 + deg(m2) > n:
                    continue
                prod = tuple(a + b for a, b in zip(m1, m2))
                cc = c1 * c2
                for nm, nc in model.reduce_monomial(prod).items():
                    out[nm] = out.get(nm, 0) + cc * nc
        return GradedElement._make({k: v for k, v in out.items() if v}, model)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return self * invert_unit(self._coerce(other))

    def __pow__(self, k: int):
        if k < 0:
            return invert_unit(self) ** (-k)
        out = self.model.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self._coerce(other)
        if not isinstance(other, GradedElement):
            return NotImplemented
        return self.model is other.model and self.terms == other.terms

    def __hash__(self):
        return hash((id(self.model), frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def constant(self) -> Fraction:
        return self.terms.get(self.model.unit_monomial, Fraction(0))

    def degree_part(self, k: int) -> "GradedElement":
        deg = self.model.monomial_degree
        return GradedElement._make({m: c for m, c in self.terms.items() if deg(m) == k}, self.model)

    def graded_parts(self) -> list["GradedElement"]:
        return [self.degree_part(k) for k in range(self.model.dimension + 1)]

    def degrees(self) -> set[int]:
        deg = self.model.monomial_degree
        return {deg(m) for m in self.terms}

    def is_homogeneous(self, k: int) -> bool:
        return self.degrees() <= {k}

    def coefficient(self, monomial) -> Fraction:
        return self.terms.get(self.model._monomial(monomial), Fraction(0))

    def __str__(self):
        return _format_raw(self.model, self.terms)

    def __repr__(self):
        return f"<{self.model.name}: {self}>"


RawPolynomial = Union[str, Mapping, int, Fraction, GradedElement]


def normalize(raw: RawPolynomial, model: ChowModel) -> GradedElement:
    """Reduce ``raw`` to normal form, dropping everything above the top degree."""
    if isinstance(raw, GradedElement) and raw.model is model:
        return raw
    terms = model.raw(raw)
    out: dict[Monomial, Fraction] = {}
    for m, c in terms.items():
        for nm, nc in model.reduce_monomial(m).items():
            out[nm] = out.get(nm, 0) + c * nc
    return GradedElement._make({k: v for k, v in out.items() if v}, model)


def invert_unit(e: GradedElement) -> GradedElement:
    """Inverse of a unit by the truncated geometric series ``c^-1 sum (-x/c)^k``."""
    c0 = e.constant
    if not c0:
        raise NotAUnitError(f"{e} has no invertible constant term")
    model = e.model
    inv0 = Fraction(1) / c0
    nil = (e - c0) * inv0
    out = model.one()
    power = model.one()
    for _ in range(model.dimension):
        power = power * (-nil)
        if power.is_zero():
            break
        out = out + power
    return out * inv0


def integrate(e: GradedElement, model: ChowModel | None = None) -> Fraction:
    model = e.model if model is None else model
    if e.model is not model:
        raise ModelError("element does not belong to this model")
    if model.integrals is None:
        raise IncompleteModelError(f"model {model.name} has no integration functional")
    total = Fraction(0)
    n = model.dimension
    for m, c in e.terms.items():
        if model.monomial_degree(m) != n:
            continue
        try:
            total += c * model.integrals[m]
        except KeyError:
            raise IncompleteModelError(
                f"no integral for {model.format_monomial(m)} in model {model.name}"
            ) from None
    return total


def elementary_symmetric(classes: Sequence[GradedElement], k: int, model: ChowModel | None = None) -> GradedElement:
    """The k-th elementary symmetric polynomial of degree-1 classes."""
    if model is None:
        if not classes:
            raise ValueError("need a model when the class list is empty")
        model = classes[0].model
    for c in classes:
        if not c.is_homogeneous(1):
            raise ModelError(f"class {c} is not of pure degree 1")
    if k < 0:
        return model.zero()
    # e_j of the first i classes, built incrementally
    es = [model.one()] + [model.zero()] * k
    for c in classes:
        for j in range(k, 0, -1):
            es[j] = es[j] + es[j - 1] * c
    return es[k]


def product(elements: Iterable[GradedElement], model: ChowModel) -> GradedElement:
    out = model.one()
    for e in elements:
        out = out * e
    return out


def free_model(name: str, generators: Sequence[tuple[str, int]], dimension: int) -> ChowModel:
    """A polynomial ring truncated above ``dimension`` with no relations and no integrals."""
    return ChowModel(name, dimension, generators, rules=(), integrals=None, validate=False)


def all_exponents(length: int, max_total: int, min_total: int = 0) -> Iterator[tuple[int, ...]]:
    """Natural-number vectors of the given length with ``min_total <= sum <= max_total``."""
    for total in range(min_total, max_total + 1):
        for combo in itertools.combinations_with_replacement(range(length), total):
            v = [0] * length
            for i in combo:
                v[i] += 1
            yield tuple(v)
