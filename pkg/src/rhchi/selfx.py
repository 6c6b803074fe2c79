"""Elimination of self-intersections in stratum terms by ordered rewrite rules.

A rule ``X ~ sum_i u_i E_i`` replaces one power of ``X`` by the fresh labels
``E_i``.  Moving ``E_i`` into the logarithmic boundary multiplies the Todd
factor by ``f(-E_i)`` with ``f(x) = x / (1 - e^{-x})``, so each substitution
fans out over the power ``k`` of the new label with weight
``u_i (-1)^(k-1) delta_(k-1)`` while the Q-subscript drops by ``k - 1``.
Rules for each label are consumed strictly in declaration order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .charclass import SheafClass
from .combinat import delta, is_mf, lambda_
from .exactring import ChowModel, GradedElement, ModelError, all_exponents, parse_rational
from .geometry import Arrangement, chi_stratum_log, chi_stratum_plain

__all__ = [
    "RuleEntry",
    "Rule",
    "RewriteRuleSet",
    "PartialTerm",
    "ExpansionTerm",
    "StuckExpansion",
    "expand_once",
    "expand_full",
    "term_coefficient",
    "admissible_terms",
    "evaluate_terms",
    "rules_from_list",
]


class StuckExpansion(ValueError):
    """A label needs another rule but its rule list is exhausted."""

    def __init__(self, label: str):
        super().__init__(f"no unused rule left for label {label!r}")
        self.label = label


@dataclass(frozen=True)
class RuleEntry:
    coeff: Fraction
    label: str
    cls: str | None = None


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[RuleEntry, ...]


class RewriteRuleSet:
    """Ordered rules; ``lists(label)`` gives that label's index sets ``I_{label,0}, I_{label,1}, ...``."""

    def __init__(self, rules: Sequence[Rule], base_labels: Sequence[str] = ()):
        self.rules = tuple(rules)
        self.base_labels = tuple(base_labels)
        known = set(self.base_labels)
        self.fresh: list[str] = []
        self._owner: dict[str, tuple[str, int]] = {}
        self._lists: dict[str, list[Rule]] = {}
        for r in self.rules:
            if self.base_labels and r.lhs not in known:
                raise ModelError(f"rule for {r.lhs!r} appears before that label is introduced")
            c = len(self._lists.setdefault(r.lhs, []))
            self._lists[r.lhs].append(r)
            for e in r.rhs:
                if e.label in known or e.label in self._owner or e.label == r.lhs:
                    raise ModelError(f"rule label {e.label!r} is not fresh")
                self._owner[e.label] = (r.lhs, c)
                self.fresh.append(e.label)
                known.add(e.label)
        self._entry = {e.label: e for r in self.rules for e in r.rhs}
        self._order = {lab: i for i, lab in enumerate(self.fresh)}

    def lists(self, label: str) -> list[Rule]:
        return self._lists.get(label, [])

    def owner(self, fresh_label: str) -> tuple[str, int]:
        """``(label, c)`` such that ``fresh_label`` lies in ``I_{label, c}``."""
        try:
            return self._owner[fresh_label]
        except KeyError:
            raise ModelError(f"label {fresh_label!r} is not introduced by any rule") from None

    def entry(self, fresh_label: str) -> RuleEntry:
        self.owner(fresh_label)
        return self._entry[fresh_label]

    def sort_fresh(self, labels) -> tuple[str, ...]:
        return tuple(sorted(labels, key=self._order.__getitem__))

    def to_list(self) -> list[dict]:
        out = []
        for r in self.rules:
            rhs = []
            for e in r.rhs:
                item = {"coeff": str(e.coeff), "label": e.label}
                if e.cls is not None:
                    item["class"] = str(e.cls)
                rhs.append(item)
            out.append({"lhs": r.lhs, "rhs": rhs})
        return out


def rules_from_list(data: Sequence[Mapping], base_labels: Sequence[str] = ()) -> RewriteRuleSet:
    try:
        rules = [
            Rule(d["lhs"], tuple(
                RuleEntry(parse_rational(str(e.get("coeff", "1"))), e["label"], e.get("class"))
                for e in d["rhs"]
            ))
            for d in data
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed rules file: {exc}") from exc
    return RewriteRuleSet(rules, base_labels)


@dataclass(frozen=True)
class PartialTerm:
    """``coefficient * prod label^power * Q_q`` with boundary = base labels plus every fresh label present."""

    powers: tuple[tuple[str, int], ...]
    q: int
    coefficient: Fraction
    used: tuple[tuple[str, int], ...] = ()

    def power_map(self) -> dict[str, int]:
        return dict(self.powers)


@dataclass(frozen=True)
class ExpansionTerm:
    base: tuple[int, ...]
    fresh: tuple[str, ...]
    coefficient: Fraction
    q: int

    def describe(self, base_labels: Sequence[str]) -> str:
        parts = [lab for lab, x in zip(base_labels, self.base) if x] + list(self.fresh)
        return "*".join(parts) + f" Q_{self.q}"


def _start(a: Sequence[int], base_labels: Sequence[str], n: int) -> PartialTerm | None:
    if sum(a) > n:
        return None
    powers = tuple((lab, int(x)) for lab, x in zip(base_labels, a) if x)
    return PartialTerm(powers, n - sum(a), Fraction(1))


def _next_label(t: PartialTerm, rules: RewriteRuleSet, base_labels: Sequence[str]) -> str | None:
    pm = t.power_map()
    for lab in base_labels:
        if pm.get(lab, 0) >= 2:
            return lab
    heavy = [lab for lab, p in t.powers if p >= 2 and lab not in base_labels]
    if heavy:
        return rules.sort_fresh(heavy)[0]
    return None


def _substitute(t: PartialTerm, label: str, rules: RewriteRuleSet) -> list[PartialTerm]:
    used = dict(t.used)
    c = used.get(label, 0)
    lists = rules.lists(label)
    if c >= len(lists):
        raise StuckExpansion(label)
    rule = lists[c]
    used[label] = c + 1
    pm = t.power_map()
    pm[label] -= 1
    out = []
    for e in rule.rhs:
        for k in range(1, t.q + 2):
            w = e.coeff * (-1) ** (k - 1) * delta((k - 1,))
            new = dict(pm)
            new[e.label] = k
            out.append(PartialTerm(
                tuple(sorted(new.items())), t.q - (k - 1), t.coefficient * w,
                tuple(sorted(used.items())),
            ))
    return out


def expand_once(a: Sequence[int], base_labels: Sequence[str], rules: RewriteRuleSet, n: int) -> list[PartialTerm]:
    """Replace one power of the first self-intersecting label of ``D^a Q_{n-|a|}``."""
    t = _start(a, base_labels, n)
    if t is None:
        return []
    label = _next_label(t, rules, base_labels)
    if label is None:
        return [t]
    return _substitute(t, label, rules)


def _measure(t: PartialTerm) -> tuple[int, int]:
    return (t.q, sum(p - 1 for _, p in t.powers))


def expand_full(a: Sequence[int], base_labels: Sequence[str], rules: RewriteRuleSet, n: int) -> list[ExpansionTerm]:
    """Run substitutions to the fixed point; every output term is multiplicity free.

    Terms are returned sorted by fresh exponent.  Zero-coefficient terms are
    kept so the output matches :func:`admissible_terms` one-to-one.
    """
    base_labels = tuple(base_labels)
    t0 = _start(a, base_labels, n)
    if t0 is None:
        return []
    stack = [t0]
    done = []
    while stack:
        t = stack.pop()
        label = _next_label(t, rules, base_labels)
        if label is None:
            done.append(t)
            continue
        before = _measure(t)
        for child in _substitute(t, label, rules):
            # k = 1 keeps Q_q and removes a self-intersection; k > 1 lowers q
            assert _measure(child) < before
            stack.append(child)
    out = []
    for t in done:
        pm = t.power_map()
        base = tuple(pm.get(lab, 0) for lab in base_labels)
        fresh = rules.sort_fresh(lab for lab in pm if lab not in base_labels)
        out.append(ExpansionTerm(base, fresh, t.coefficient, t.q))
    out.sort(key=lambda x: [rules.fresh.index(l) for l in x.fresh])
    return out


def _hit_counts(b: Sequence[str], rules: RewriteRuleSet) -> dict[str, list[int]]:
    """For each label, how many members of ``b`` fall in each of its rule lists."""
    counts: dict[str, list[int]] = {}
    for lab in b:
        owner, c = rules.owner(lab)
        row = counts.setdefault(owner, [0] * len(rules.lists(owner)))
        row[c] += 1
    return counts


def term_coefficient(b: Sequence[str], rules: RewriteRuleSet, *, signed: bool = True) -> Fraction:
    """``prod_{i in b} u_i delta_(y_i)``, ``y_i`` the number of rules of ``E_i`` used inside ``b``.

    With ``signed`` each factor also carries ``(-1)^(y_i)``, the sign produced
    by the substitution step; ``signed=False`` gives the unsigned product.
    """
    counts = _hit_counts(b, rules)
    out = Fraction(1)
    for lab in b:
        y = sum(counts.get(lab, []))
        out *= rules.entry(lab).coeff * delta((y,))
        if signed:
            out *= (-1) ** y
    return out


def admissible_terms(a: Sequence[int], base_labels: Sequence[str], rules: RewriteRuleSet, n: int) -> list[tuple[str, ...]]:
    """Fresh-label sets picked by first-rule-first expansion, by direct filtering.

    Conditions: each rule list is hit at most once; an original label with
    exponent ``a_j`` hits exactly ``a_j - 1`` lists; lists are hit as a prefix;
    ``|b| <= n - |tilde a|``; and only labels present in the term (originals
    with ``a_j >= 1`` or members of ``b``) have their lists hit.
    """
    base_labels = tuple(base_labels)
    if sum(a) > n:
        return []
    amap = dict(zip(base_labels, a))
    tilde_w = sum(1 for x in a if x)
    out = []
    for size in range(0, n - tilde_w + 1):
        for b in itertools.combinations(rules.fresh, size):
            counts = _hit_counts(b, rules)
            ok = True
            for owner, row in counts.items():
                if any(x > 1 for x in row):
                    ok = False
                    break
                hits = sum(row)
                if any(row[c] and not row[c - 1] for c in range(1, len(row))):
                    ok = False
                    break
                if owner in amap:
                    if hits != amap[owner] - 1:
                        ok = False
                        break
                elif owner not in b:
                    ok = False
                    break
            if not ok:
                continue
            for lab, x in amap.items():
                if x >= 2 and lab not in counts:
                    ok = False
            if ok:
                out.append(rules.sort_fresh(b))
    out.sort(key=lambda x: [rules.fresh.index(l) for l in x])
    return out


def _fresh_classes(model: ChowModel, rules: RewriteRuleSet) -> dict[str, GradedElement]:
    out = {}
    for lab in rules.fresh:
        e = rules.entry(lab)
        if e.cls is None:
            raise ModelError(f"rule label {lab!r} has no class; evaluation needs one")
        out[lab] = model.element(e.cls)
    return out


def evaluate_terms(model: ChowModel, arr: Arrangement, terms: Sequence[ExpansionTerm],
                   rules: RewriteRuleSet, s: SheafClass, *, plain: bool = False) -> Fraction:
    """Sum of ``coefficient * chi(D^{tilde a} E^b, Delta', s)`` over expansion terms.

    With ``plain`` each logarithmic term is further rewritten through plain
    Euler characteristics of strata (MF strata plain, NMF strata log).
    """
    classes = _fresh_classes(model, rules)
    total = Fraction(0)
    for t in terms:
        if not t.coefficient:
            continue
        ext = arr.extended([(lab, classes[lab]) for lab in t.fresh])
        exp = tuple(t.base) + (1,) * len(t.fresh)
        if plain:
            val = _log_via_plain(model, ext, exp, s)
        else:
            val = chi_stratum_log(model, ext, exp, s)
        total += t.coefficient * val
    return total


def _log_via_plain(model: ChowModel, arr: Arrangement, b: Sequence[int], s: SheafClass) -> Fraction:
    """Log chi of an MF stratum as ``-sum_c (-1)^|c| lambda_c chi(D^{b+c})`` over ``c`` off ``supp(b)``."""
    free = [i for i, x in enumerate(b) if not x]
    room = model.dimension - sum(b)
    total = Fraction(0)
    for cv in all_exponents(len(free), room, 0):
        lam = lambda_(cv)
        if not lam:
            continue
        full = list(b)
        for i, x in zip(free, cv):
            full[i] = x
        val = (chi_stratum_plain(model, arr, full, s) if is_mf(cv)
               else chi_stratum_log(model, arr, full, s))
        total -= (-1) ** sum(cv) * lam * val
    return total
