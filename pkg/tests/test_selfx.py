from fractions import Fraction

import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from conftest import sheaves
from rhchi import builtins
from rhchi.charclass import SheafClass
from rhchi.combinat import is_mf
from rhchi.exactring import ModelError
from rhchi.geometry import Arrangement, chi_stratum_log
from rhchi.selfx import (
    StuckExpansion,
    admissible_terms,
    evaluate_terms,
    expand_full,
    expand_once,
    rules_from_list,
    term_coefficient,
)
from rhchi.suite import REFERENCE_CHAIN

F = Fraction
O = SheafClass.trivial()


def chain():
    return builtins.rewrite_example("quadric-chain")


def _expand(ex):
    return expand_full(ex.exponent, ex.arrangement.labels, ex.rules, ex.model.dimension)


# -- the quadric chain ----------------------------------------------------------------


def test_quadric_chain_label_sets():
    terms = [t for t in _expand(chain()) if t.coefficient]
    assert {t.fresh for t in terms} == set(REFERENCE_CHAIN)
    assert len(terms) == 8
    for t in terms:
        assert t.base == (1,)
        assert abs(t.coefficient) == REFERENCE_CHAIN[t.fresh]


def test_quadric_chain_signs():
    got = {t.fresh: t.coefficient for t in _expand(chain()) if t.coefficient}
    # the one-step terms pick up the sign of the substitution weight
    assert got[("E1", "E3")] == got[("E2", "E5")] == F(-1, 2)
    assert got[("E1",)] == got[("E2",)] == 1
    assert got[("E1", "E3", "E7")] == F(1, 4)
    assert got[("E1", "E3", "E4")] == F(1, 12)


def test_quadric_chain_describe():
    terms = {t.fresh: t for t in _expand(chain())}
    assert terms[("E1", "E3")].describe(["D"]) == "D*E1*E3 Q_1"


def test_quadric_chain_conservation():
    ex = chain()
    lhs = chi_stratum_log(ex.model, ex.arrangement, ex.exponent, O)
    rhs = evaluate_terms(ex.model, ex.arrangement, _expand(ex), ex.rules, O)
    assert lhs == rhs == F(13, 3)


def test_unsigned_coefficients_break_conservation():
    ex = chain()
    terms = _expand(ex)
    unsigned = [type(t)(t.base, t.fresh, term_coefficient(t.fresh, ex.rules, signed=False), t.q) for t in terms]
    lhs = chi_stratum_log(ex.model, ex.arrangement, ex.exponent, O)
    assert evaluate_terms(ex.model, ex.arrangement, unsigned, ex.rules, O) != lhs


@pytest.mark.parametrize("name", builtins.rewrite_example_names())
@settings(max_examples=10)
@given(data=st.data())
def test_builtin_examples_conserve(name, data):
    ex = builtins.rewrite_example(name)
    s = data.draw(sheaves(ex.model))
    terms = _expand(ex)
    lhs = chi_stratum_log(ex.model, ex.arrangement, ex.exponent, s)
    assert evaluate_terms(ex.model, ex.arrangement, terms, ex.rules, s) == lhs
    assert evaluate_terms(ex.model, ex.arrangement, terms, ex.rules, s, plain=True) == lhs


def test_term_coefficient_examples():
    r = chain().rules
    assert term_coefficient(("E1",), r) == 1
    assert term_coefficient(("E1", "E3", "E4"), r) == F(1, 12)
    assert term_coefficient(("E1", "E3"), r, signed=False) == F(1, 2)
    assert term_coefficient(("E1", "E3"), r) == F(-1, 2)


def test_admissible_terms_match_reference_sets():
    ex = chain()
    sets = admissible_terms(ex.exponent, ex.arrangement.labels, ex.rules, ex.model.dimension)
    assert set(sets) == set(REFERENCE_CHAIN) and len(sets) == 8


# -- edge cases ---------------------------------------------------------------------------


def test_mf_input_is_unchanged():
    ex = chain()
    out = expand_full((1,), ex.arrangement.labels, ex.rules, 4)
    assert [(t.base, t.fresh, t.coefficient, t.q) for t in out] == [((1,), (), 1, 3)]
    assert admissible_terms((1,), ex.arrangement.labels, ex.rules, 4) == [()]


def test_zero_exponent_sum_is_empty():
    ex = chain()
    assert expand_full((0,), ex.arrangement.labels, ex.rules, 4)[0].fresh == ()
    assert expand_full((5,), ex.arrangement.labels, ex.rules, 4) == []
    assert expand_once((5,), ex.arrangement.labels, ex.rules, 4) == []


def test_zero_weight_gives_zero_terms():
    rules = rules_from_list([{"lhs": "D", "rhs": [{"coeff": "0", "label": "E1"}]},
                             {"lhs": "E1", "rhs": [{"coeff": "1", "label": "E2"}]}], ["D"])
    out = expand_full((2,), ["D"], rules, 2)
    assert out and all(t.coefficient == 0 for t in out)


def test_stuck_expansion():
    rules = rules_from_list([{"lhs": "D", "rhs": [{"coeff": "1", "label": "E1"}]}], ["D"])
    with pytest.raises(StuckExpansion) as info:
        expand_full((3,), ["D"], rules, 3)
    assert info.value.label == "D"


def test_expand_once_first_step():
    ex = chain()
    step = expand_once((2,), ex.arrangement.labels, ex.rules, 4)
    # two fresh labels times k = 1..q+1 with q = 2
    assert len(step) == 6
    assert {t.q for t in step} == {2, 1, 0}


def test_rule_validation():
    with pytest.raises(ModelError, match="fresh"):
        rules_from_list([{"lhs": "D", "rhs": [{"label": "D"}]}], ["D"])
    with pytest.raises(ModelError, match="before"):
        rules_from_list([{"lhs": "E9", "rhs": [{"label": "E1"}]}], ["D"])
    with pytest.raises(ModelError, match="malformed"):
        rules_from_list([{"rhs": []}], ["D"])


def test_evaluation_needs_classes():
    rules = rules_from_list([{"lhs": "D", "rhs": [{"coeff": "1", "label": "E1"}]}], ["D"])
    m = builtins.model("p2")
    arr = Arrangement.of(m, [("D", "H")])
    terms = expand_full((2,), ["D"], rules, 2)
    with pytest.raises(ModelError, match="class"):
        evaluate_terms(m, arr, terms, rules, O)


def test_rules_round_trip():
    r = chain().rules
    again = rules_from_list(r.to_list(), ["D"])
    assert again.to_list() == r.to_list()
    assert again.owner("E4") == ("E1", 1)


# -- random rule sets ------------------------------------------------------------------------

coeffs = st.fractions(min_value=-2, max_value=2, max_denominator=3)


@st.composite
def rule_sets(draw):
    """True relations on P^n: every label has class a multiple of H, and each
    rule's right side has the same total class as its left side."""
    n = draw(st.integers(2, 4))
    mult = draw(st.integers(1, 3))
    rules, pending, counter = [], [("D", mult, 0)], [0]
    while pending:
        lab, m, depth = pending.pop(0)
        nlists = draw(st.integers(0 if depth else 1, 2)) if depth < 3 else 0
        for _ in range(nlists):
            width = draw(st.integers(1, 2))
            cs = [draw(coeffs) for _ in range(width - 1)]
            cs.append(m - sum(cs))
            rhs = []
            for c in cs:
                counter[0] += 1
                name = f"E{counter[0]}"
                rhs.append({"coeff": str(c), "label": name, "class": "H"})
                pending.append((name, 1, depth + 1))
            rules.append({"lhs": lab, "rhs": rhs})
    a = draw(st.integers(1, n))
    m = builtins.model(f"p{n}")
    arr = Arrangement.of(m, [("D", f"{mult}*H")])
    return m, arr, (a,), rules_from_list(rules, ["D"])


def _expand_or_reject(a, labels, rules, n):
    try:
        return expand_full(a, labels, rules, n)
    except StuckExpansion:
        assume(False)


@settings(max_examples=60, suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow])
@given(rule_sets())
def test_expansion_matches_closed_form(case):
    m, arr, a, rules = case
    n = m.dimension
    terms = _expand_or_reject(a, arr.labels, rules, n)
    assert all(is_mf(t.base + (1,) * len(t.fresh)) for t in terms)
    by_set = {t.fresh: t for t in terms}
    assert len(by_set) == len(terms)
    assert sorted(by_set) == sorted(admissible_terms(a, arr.labels, rules, n))
    for b, t in by_set.items():
        assert t.coefficient == term_coefficient(b, rules)
        assert t.q == n - sum(1 for x in t.base if x) - len(b)


@settings(max_examples=40, suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow])
@given(rule_sets(), st.data())
def test_random_rules_conserve(case, data):
    m, arr, a, rules = case
    terms = _expand_or_reject(a, arr.labels, rules, m.dimension)
    s = data.draw(sheaves(m))
    assert evaluate_terms(m, arr, terms, rules, s) == chi_stratum_log(m, arr, a, s)
