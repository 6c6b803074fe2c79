from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import sheaves
from rhchi import builtins
from rhchi.charclass import SheafClass
from rhchi.combinat import delta, is_mf, monomial_type
from rhchi.cover import (
    CoverData,
    CoverError,
    SignError,
    check_log_chi,
    check_log_pullback,
    corollary_coefficient_raw,
    cover_from_dict,
    cover_to_dict,
    determine_sign,
    pullback,
    rh_lhs,
    rh_rhs_corollary,
    rh_rhs_theorem,
    rh_terms,
    simple_mf_coefficient,
    simple_nmf_coefficient,
    validate_cover,
)
from rhchi.exactring import all_exponents
from rhchi.geometry import Arrangement
from rhchi.io import model_to_ref, resolve_model

O = SheafClass.trivial()
ALL_COVERS = builtins.cover_names()
RH_COVERS = builtins.rh_cover_names()


def cov(name):
    return builtins.cover(name)


# -- validation ----------------------------------------------------------------------


@pytest.mark.parametrize("name", ALL_COVERS)
def test_builtin_covers_validate(name):
    checks = validate_cover(cov(name))
    assert all(ch.ok for ch in checks), [ch for ch in checks if not ch.ok]


def test_squaring_checks():
    c = cov("squaring")
    first = [ch for ch in validate_cover(c) if ch.name.startswith("pullback-branch")]
    assert len(first) == 2 and all(ch.ok for ch in first)
    assert str(pullback(c, c.codomain.gen("H"))) == "2*p"


def test_conic_pullback_branch_identity():
    c = cov("conic")
    (check,) = [ch for ch in validate_cover(c) if ch.name.startswith("pullback-branch")]
    assert check.ok
    X = c.domain
    assert pullback(c, c.branch.classes[0]) == X.element("2*h1 + 2*h2")


def test_identity_cover_is_vacuous():
    checks = validate_cover(cov("identity"))
    assert all(ch.ok for ch in checks)
    assert not [ch for ch in checks if ch.name.startswith("pullback-branch")]


def _split_fiber_cover():
    # (x, y) -> (x^2, y) on P1xP1, with the unramified pair x = +-1 over x = 1
    q = builtins.model("p1xp1")
    branch = Arrangement.of(q, [("B0", "h1"), ("Binf", "h1"), ("B1", "h1")])
    ram = Arrangement.of(q, [("R0", "h1"), ("Rinf", "h1"), ("Rp", "h1"), ("Rm", "h1")])
    return CoverData("split", q, q, 2, {"h1": "2*h1", "h2": "h2"}, branch, ram,
                     {"R0": "B0", "Rinf": "Binf", "Rp": "B1", "Rm": "B1"},
                     {"R0": 2, "Rinf": 2, "Rp": 1, "Rm": 1},
                     component_degrees={"R0": 1, "Rinf": 1, "Rp": 1, "Rm": 1})


def test_type_mismatch_strata_vanish():
    c = _split_fiber_cover()
    checks = validate_cover(c)
    assert all(ch.ok for ch in checks)
    mism = [ch for ch in checks if ch.name.startswith("type-mismatch")]
    assert mism
    assert any(n.name.startswith("degree-sum") for n in checks)
    assert any(n.name.startswith("disjoint-over-branch") for n in checks)


def test_unramified_components_do_not_change_rh():
    c = _split_fiber_cover()
    lhs = rh_lhs(c, O)
    assert rh_rhs_theorem(c, O, -1) == lhs == rh_rhs_corollary(c, O, -1)


def test_degree_check_at_load():
    p1 = builtins.model("p1")
    with pytest.raises(CoverError, match="integrates"):
        CoverData("bad", p1, p1, 3, {"H": "2*H"}, Arrangement.of(p1), Arrangement.of(p1), {}, {})


def test_assignment_errors():
    p1 = builtins.model("p1")
    b = Arrangement.of(p1, [("B", "H")])
    r = Arrangement.of(p1, [("R", "H")])
    with pytest.raises(CoverError):
        CoverData("x", p1, p1, 1, {"H": "H"}, b, r, {"R": "C"}, {"R": 1})
    with pytest.raises(CoverError):
        CoverData("x", p1, p1, 1, {"H": "H"}, b, r, {"R": "B"}, {"R": 0})
    with pytest.raises(CoverError):
        CoverData("x", p1, p1, 1, {"H": "H"}, b, Arrangement.of(p1), {}, {})


def test_failed_pullback_check_reported():
    p1 = builtins.model("p1")
    b = Arrangement.of(p1, [("B", "H")])
    r = Arrangement.of(p1, [("R", "H")])
    # wrong ramification index: pi^*B = H but e*R = 3H
    c = CoverData("bad", p1, p1, 1, {"H": "H"}, b, r, {"R": "B"}, {"R": 3})
    bad = [ch for ch in validate_cover(c) if not ch.ok]
    assert any(ch.name.startswith("pullback-branch") for ch in bad)


# -- pullback identities ---------------------------------------------------------------


@pytest.mark.parametrize("name", ALL_COVERS)
def test_log_chern_pullback(name):
    ok, rows = check_log_pullback(cov(name))
    assert ok, rows


def test_log_chern_pullback_examples():
    ok, rows = check_log_pullback(cov("squaring"))
    assert rows[0][1].is_zero() and rows[0][2].is_zero()
    ok, rows = check_log_pullback(cov("conic"))
    X = cov("conic").domain
    assert rows[0][1] == rows[0][2] == X.element("-h1 - h2")


@pytest.mark.parametrize("name", ALL_COVERS)
@settings(max_examples=10)
@given(data=st.data())
def test_log_chi_scales_by_degree(name, data):
    c = cov(name)
    s = data.draw(sheaves(c.codomain))
    ok, lhs, rhs = check_log_chi(c, s)
    assert ok and lhs == rhs


def test_log_chi_examples():
    assert check_log_chi(cov("squaring"), O) == (True, 0, 0)


# -- Riemann-Hurwitz ---------------------------------------------------------------------


def test_lhs_examples():
    assert rh_lhs(cov("squaring"), O) == 1
    assert rh_lhs(cov("identity"), O) == 0
    for g in range(1, 6):
        assert rh_lhs(cov(f"hyperelliptic{g}"), O) == g + 1


def test_squaring_terms():
    rows = rh_terms(cov("squaring"), O, -1)
    assert [r["a"] for r in rows] == [(1, 0), (0, 1)]
    for r in rows:
        assert r["delta"] == Fraction(1, 2) and r["E"] == 2 and r["chi_log_stratum"] == 1
    assert rh_rhs_theorem(cov("squaring"), O, -1) == 1
    assert rh_rhs_theorem(cov("squaring"), O, 1) == -1


def test_conic_has_self_intersection_term():
    rows = {r["a"]: r for r in rh_terms(cov("conic"), O, -1)}
    assert rows[(2,)]["E"] == 4
    assert rows[(2,)]["delta"] == Fraction(1, 12)


def test_bad_sign_value():
    with pytest.raises(ValueError):
        rh_rhs_theorem(cov("squaring"), O, 0)


@pytest.mark.parametrize("name", ["identity", "identity-marked", "etale"])
def test_etale_cases_vanish(name):
    c = cov(name)
    for sign in (1, -1):
        assert rh_rhs_theorem(c, O, sign) == 0
        assert rh_rhs_corollary(c, O, sign) == 0
    assert rh_lhs(c, O) == 0


def test_sign_examples():
    assert determine_sign([cov("squaring")]) == -1
    for g in range(2, 6):
        assert determine_sign([cov(f"hyperelliptic{g}")]) == -1
    with pytest.raises(SignError, match="both signs"):
        determine_sign([cov("etale")])
    with pytest.raises(SignError):
        determine_sign([])


@pytest.mark.parametrize("name", RH_COVERS)
@settings(max_examples=10)
@given(data=st.data())
def test_theorem_and_corollary_agree_with_lhs(name, data):
    c = cov(name)
    s = data.draw(sheaves(c.codomain))
    lhs = rh_lhs(c, s)
    assert rh_rhs_theorem(c, s, -1) == lhs
    assert rh_rhs_corollary(c, s, -1) == lhs


def test_sign_is_global():
    covers = [cov(n) for n in RH_COVERS]
    assert determine_sign(covers) == -1


# -- corollary coefficients -------------------------------------------------------------


@pytest.mark.parametrize("name", RH_COVERS)
def test_raw_coefficients_match_closed_forms(name):
    c = cov(name)
    for a in all_exponents(len(c.ram), c.dimension, 1):
        closed = simple_mf_coefficient(c, a) if is_mf(a) else simple_nmf_coefficient(c, a)
        assert corollary_coefficient_raw(c, a) == closed


def test_single_label_coefficients():
    c = cov("conic")
    assert corollary_coefficient_raw(c, (1,)) == delta((1,)) * (1 - 2) == Fraction(-1, 2)
    # NMF (2): delta_(2) (e^2 - 1), sign (-1)^2
    assert corollary_coefficient_raw(c, (2,)) == delta((2,)) * (4 - 1) == Fraction(1, 4)


def test_mf_coefficient_on_two_labels():
    c = cov("component-squaring")
    a = (1, 0, 1, 0) if c.ram.classes[0] * c.ram.classes[2] else (1, 1, 0, 0)
    assert simple_mf_coefficient(c, a) == Fraction(1, 4)
    assert monomial_type(a) == (1, 1)


# -- serialization ------------------------------------------------------------------------


@pytest.mark.parametrize("name", ALL_COVERS)
def test_cover_round_trip(name):
    c = cov(name)
    d = cover_to_dict(c, model_to_ref)
    again = cover_from_dict(d, lambda ref: resolve_model(ref, None))
    assert cover_to_dict(again, model_to_ref) == d
    assert rh_lhs(again, O) == rh_lhs(c, O)


def test_malformed_cover_dict():
    with pytest.raises(CoverError):
        cover_from_dict({"domain": "builtin:p1"}, lambda ref: resolve_model(ref, None))
