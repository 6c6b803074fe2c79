import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import model_named, sheaves
from rhchi import builtins
from rhchi.charclass import SheafClass
from rhchi.exactring import ModelError
from rhchi.geometry import (
    Arrangement,
    ChiConvention,
    RingMap,
    boundary_restriction_check,
    build_genus_curve,
    build_product,
    build_projective_space,
    chi,
    chi_log,
    chi_stratum_log,
    chi_stratum_plain,
    euler_vs_log,
    leprim_imprim,
    load_model,
    log_cotangent,
    secondary_induction,
)
from rhchi.selfx import _log_via_plain

O = SheafClass.trivial()
LIT, TW = ChiConvention.LITERAL, ChiConvention.TWISTED


def test_builder_cotangents():
    p2 = build_projective_space(2)
    assert [str(c) for c in p2.cotangent] == ["-3*H", "3*H^2"]
    q = build_product(build_projective_space(1), build_projective_space(1), ["h1"], ["h2"])
    assert q.total_cotangent() == (1 - q.gen("h1") * 2) * (1 - q.gen("h2") * 2)
    assert str(build_genus_curve(0).cotangent[0]) == "-2*p"


def test_product_rules_are_not_duplicated():
    q = builtins.model("p1xp1")
    lhs = [r[0] for r in q.rules]
    assert len(lhs) == len(set(lhs))


def test_product_of_plane_and_line():
    m = build_product(build_projective_space(2), build_projective_space(1), ["a"], ["b"])
    assert m.integrate(m.element("a^2*b")) == 1
    # Kunneth for the structure sheaf in the twisted convention
    assert chi(m, O, TW) == 1


def test_log_cotangent_examples():
    p2, p1 = builtins.model("p2"), builtins.model("p1")
    line = builtins.arrangement(p2, "line")
    assert [str(c) for c in log_cotangent(p2, line)] == ["-2*H", "H^2"]
    assert log_cotangent(p2, Arrangement.of(p2)) == p2.cotangent
    assert log_cotangent(p1, builtins.arrangement(p1, "two-points"))[0].is_zero()


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_log_cotangent_of_hyperplanes_is_quotient(n):
    # k hyperplanes: c(Omega log) = (1 - H)^(n+1-k) truncated
    m = builtins.model(f"p{n}")
    H = m.gen("H")
    for k in range(0, n + 2):
        arr = Arrangement.of(m, [(f"D{i}", "H") for i in range(k)])
        total = m.one()
        for c in log_cotangent(m, arr):
            total = total + c
        expected = m.one()
        for _ in range(n + 1 - k):
            expected = expected * (1 - H)
        assert total == expected


def test_chi_examples():
    p1, p2 = builtins.model("p1"), builtins.model("p2")
    assert chi(p1, O, LIT) == -1
    assert chi(p1, O, TW) == 1
    assert chi(p2, O, LIT) == chi(p2, O, TW) == 1
    for n in (1, 2, 3):
        assert chi(builtins.model(f"p{n}"), O, TW) == 1


def test_chi_log_examples():
    p1, p2 = builtins.model("p1"), builtins.model("p2")
    assert chi_log(p1, builtins.arrangement(p1, "two-points"), O) == 0
    assert chi_log(p2, Arrangement.of(p2), O) == chi(p2, O, LIT)
    assert chi_log(p2, builtins.arrangement(p2, "line"), O) == Fraction(5, 12)


def test_stratum_examples():
    q, p2, c = builtins.model("p1xp1"), builtins.model("p2"), builtins.model("curve2")
    fibers = builtins.arrangement(q, "fibers")
    assert chi_stratum_log(q, fibers, (1, 1), O) == 1
    assert chi_stratum_log(p2, builtins.arrangement(p2, "line"), (2,), O) == 1
    assert chi_stratum_log(p2, builtins.arrangement(p2, "line"), (3,), O) == 0
    one_fiber = Arrangement.of(q, [("F", "h1")])
    assert chi_stratum_plain(q, one_fiber, (1,), O) == chi(builtins.model("p1"), O, LIT) == -1
    assert chi_stratum_plain(c, builtins.arrangement(c, "point"), (1,), SheafClass.trivial(3)) == 3


def test_stratum_plain_rejects_nmf():
    p2 = builtins.model("p2")
    with pytest.raises(ValueError):
        chi_stratum_plain(p2, builtins.arrangement(p2, "line"), (2,), O)


def test_boundary_restriction_examples():
    p2, p1, q = builtins.model("p2"), builtins.model("p1"), builtins.model("p1xp1")
    ok, rows = boundary_restriction_check(p2, builtins.arrangement(p2, "line"), "D1", p1, {"H": "H"}, details=True)
    assert ok and rows == [((1,), -2, -2, True)]
    ok, rows = boundary_restriction_check(q, Arrangement.of(q, [("F", "h1")]), "F", p1,
                                          {"h1": "0", "h2": "H"}, details=True)
    assert ok and rows[0][1] == -2
    ok = boundary_restriction_check(p1, builtins.arrangement(p1, "point"), "D1", builtins.model("pt"), {"H": "0"})
    assert ok


def test_incompatible_correspondence():
    p2, p1 = builtins.model("p2"), builtins.model("p1")
    # images must keep degree
    with pytest.raises(ModelError):
        RingMap(p1, p2, {"H": "H^2"})
    with pytest.raises(ModelError, match="incompatible"):
        # h1^2 = 0 on the source but H^2 != 0 on the plane
        RingMap(builtins.model("p1xp1"), p2, {"h1": "H", "h2": "H"})


def test_stratum_conventions_agree():
    for name in ["p2", "p3", "p1xp1"]:
        m = builtins.model(name)
        for arr in builtins.arrangements_for(m).values():
            assert chi_stratum_log(m, arr, (0,) * len(arr), O) == chi_log(m, arr, O)
            full = (1,) * len(arr)
            if sum(full) <= m.dimension:
                assert chi_stratum_plain(m, arr, full, O) == chi_stratum_log(m, arr, full, O)


def test_model_file_round_trip(tmp_path):
    for name in builtins.model_names():
        m = builtins.model(name)
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(m.to_dict()))
        again = load_model(path)
        assert again.to_dict() == m.to_dict()


def test_malformed_model_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dimension": 1}))
    with pytest.raises(ModelError):
        load_model(path)
    path.write_text("{not json")
    with pytest.raises(ModelError):
        load_model(path)


# -- identities ----------------------------------------------------------------------

IDENTITY_CASES = [(m, a) for m in ["p1", "p2", "p3", "p1xp1", "curve4"]
                  for a in builtins.arrangements_for(builtins.model(m))]


@pytest.mark.parametrize("mname,aname", IDENTITY_CASES)
@given(data=st.data())
def test_euler_vs_log_identities(mname, aname, data):
    m = model_named(mname)
    arr = builtins.arrangement(m, aname)
    s = data.draw(sheaves(m))
    lhs, rhs = euler_vs_log(m, arr, s)
    assert lhs == rhs
    lhs2, rhs2 = leprim_imprim(m, arr, s)
    assert lhs2 == rhs2 == lhs
    if all((c * c).is_zero() for c in arr.classes):
        assert secondary_induction(m, arr, s) == (lhs, rhs)


def test_secondary_induction_requires_square_zero():
    p2 = builtins.model("p2")
    with pytest.raises(ValueError):
        secondary_induction(p2, builtins.arrangement(p2, "line"), O)


@pytest.mark.parametrize("mname,aname", [("p2", "line-conic"), ("p3", "three-lines"), ("p1xp1", "fiber-diagonal")])
@given(data=st.data())
def test_stratum_log_through_plain(mname, aname, data):
    m = model_named(mname)
    arr = builtins.arrangement(m, aname)
    s = data.draw(sheaves(m))
    for a in [(1,) + (0,) * (len(arr) - 1), (0,) * len(arr)]:
        assert _log_via_plain(m, arr, a, s) == chi_stratum_log(m, arr, a, s)


def test_log_chern_round_trip_everywhere():
    for name in builtins.model_names():
        m = builtins.model(name)
        for arr in builtins.arrangements_for(m).values():
            total = m.one()
            for c in log_cotangent(m, arr):
                total = total + c
            assert total * arr.boundary_factor() == m.total_cotangent()
