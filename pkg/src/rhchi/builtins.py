"""Registry of built-in models, arrangements, covers and rewrite examples.

Everything is addressable as ``builtin:<name>`` from the command line, and each
object round-trips through the JSON layouts in :mod:`rhchi.io`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .cover import CoverData
from .exactring import ChowModel, ModelError
from .geometry import (
    Arrangement,
    build_genus_curve,
    build_point,
    build_product,
    build_projective_space,
)
from .selfx import RewriteRuleSet, rules_from_list

__all__ = [
    "model",
    "model_names",
    "arrangement",
    "arrangements_for",
    "cover",
    "cover_names",
    "rh_cover_names",
    "RewriteExample",
    "rewrite_example",
    "rewrite_example_names",
    "model_name_of",
]

MAX_GENUS = 5


@lru_cache(maxsize=None)
def _build_model(name: str) -> ChowModel:
    if name == "pt":
        return build_point()
    if name in {"p1", "p2", "p3", "p4"}:
        return build_projective_space(int(name[1]))
    if name == "p1xp1":
        return build_product(build_projective_space(1), build_projective_space(1),
                             ["h1"], ["h2"], name="P1xP1")
    if name.startswith("curve") and name[5:].isdigit():
        return build_genus_curve(int(name[5:]))
    raise ModelError(f"unknown built-in model {name!r}")


def model_names() -> list[str]:
    return ["pt", "p1", "p2", "p3", "p4", "p1xp1"] + [f"curve{g}" for g in range(MAX_GENUS + 1)]


def model(name: str) -> ChowModel:
    return _build_model(name.removeprefix("builtin:"))


def model_name_of(m: ChowModel) -> str | None:
    for name in model_names():
        if _build_model(name) is m:
            return name
    return None


# -- arrangements ----------------------------------------------------------------


def _generic(m: ChowModel) -> dict[str, list[tuple[str, str]]]:
    g = m.generator_names[0]
    return {
        "line": [("D1", g)],
        "two-lines": [("D1", g), ("D2", g)],
        "three-lines": [("D1", g), ("D2", g), ("D3", g)],
        "conic": [("D1", f"2*{g}")],
        "line-conic": [("D1", g), ("D2", f"2*{g}")],
    }


def _product(m: ChowModel) -> dict[str, list[tuple[str, str]]]:
    a, b = m.generator_names
    return {
        "fibers": [("F1", a), ("F2", b)],
        "four-fibers": [("F1", a), ("F2", a), ("F3", b), ("F4", b)],
        "diagonal": [("D1", f"{a} + {b}")],
        "fiber-diagonal": [("F1", a), ("D1", f"{a} + {b}")],
    }


def _table(m: ChowModel) -> dict[str, list[tuple[str, str]]]:
    if m.dimension == 0:
        return {"empty": []}
    out = {"empty": []}
    if len(m.generators) == 2:
        out.update(_product(m))
    else:
        out.update(_generic(m))
        if m.dimension == 1:
            out["point"] = out["line"]
            out["two-points"] = out["two-lines"]
            out["three-points"] = out["three-lines"]
    return out


def arrangement(m: ChowModel, name: str) -> Arrangement:
    """Named arrangement on ``m`` (``line``, ``conic``, ``fibers``, ...)."""
    table = _table(m)
    key = name.removeprefix("builtin:")
    if key not in table:
        raise ModelError(f"no built-in arrangement {key!r} on {m.name}; have {sorted(table)}")
    return Arrangement.of(m, table[key])


def arrangements_for(m: ChowModel) -> dict[str, Arrangement]:
    """Every built-in arrangement on ``m`` except the empty one."""
    return {k: Arrangement.of(m, v) for k, v in _table(m).items() if v}


# -- covers ------------------------------------------------------------------------


def _double_cover_of_line(name: str, X: ChowModel, points: int) -> CoverData:
    Y = model("p1")
    br = [(f"B{i}", "H") for i in range(1, points + 1)]
    rm = [(f"R{i}", "p") for i in range(1, points + 1)]
    return CoverData(
        name=name, domain=X, codomain=Y, degree=2,
        pullback_images={"H": "2*p"},
        branch=Arrangement.of(Y, br), ram=Arrangement.of(X, rm),
        assignment={f"R{i}": f"B{i}" for i in range(1, points + 1)},
        ram_index={f"R{i}": 2 for i in range(1, points + 1)},
        component_degrees={f"R{i}": 1 for i in range(1, points + 1)},
    )


def _build_cover(name: str) -> CoverData:
    if name == "squaring":
        return _double_cover_of_line(name, model("curve0"), 2)
    if name.startswith("hyperelliptic") and name[13:].isdigit():
        g = int(name[13:])
        if not 1 <= g <= MAX_GENUS:
            raise ModelError(f"hyperelliptic genus must be in 1..{MAX_GENUS}")
        return _double_cover_of_line(name, model(f"curve{g}"), 2 * g + 2)
    if name == "conic":
        X, Y = model("p1xp1"), model("p2")
        return CoverData(
            name=name, domain=X, codomain=Y, degree=2,
            pullback_images={"H": "h1 + h2"},
            branch=Arrangement.of(Y, [("B", "2*H")]),
            ram=Arrangement.of(X, [("R", "h1 + h2")]),
            assignment={"R": "B"}, ram_index={"R": 2}, component_degrees={"R": 1},
        )
    if name == "component-squaring":
        X = Y = model("p1xp1")
        labels = {"R1": ("B1", "h1"), "R2": ("B2", "h1"), "R3": ("B3", "h2"), "R4": ("B4", "h2")}
        return CoverData(
            name=name, domain=X, codomain=Y, degree=4,
            pullback_images={"h1": "2*h1", "h2": "2*h2"},
            branch=Arrangement.of(Y, [(b, c) for b, c in labels.values()]),
            ram=Arrangement.of(X, [(r, c) for r, (_, c) in labels.items()]),
            assignment={r: b for r, (b, _) in labels.items()},
            ram_index={r: 2 for r in labels},
            component_degrees={r: 2 for r in labels},
        )
    if name == "identity":
        Y = model("p1")
        return CoverData(
            name=name, domain=Y, codomain=Y, degree=1, pullback_images={"H": "H"},
            branch=Arrangement.of(Y), ram=Arrangement.of(Y), assignment={}, ram_index={},
        )
    if name == "identity-marked":
        Y = model("p2")
        return CoverData(
            name=name, domain=Y, codomain=Y, degree=1, pullback_images={"H": "H"},
            branch=Arrangement.of(Y, [("B", "H")]), ram=Arrangement.of(Y, [("R", "H")]),
            assignment={"R": "B"}, ram_index={"R": 1}, component_degrees={"R": 1},
        )
    if name == "etale":
        X, Y = model("curve3"), model("curve2")
        return CoverData(
            name=name, domain=X, codomain=Y, degree=2, pullback_images={"p": "2*p"},
            branch=Arrangement.of(Y), ram=Arrangement.of(X), assignment={}, ram_index={},
        )
    raise ModelError(f"unknown built-in cover {name!r}")


@lru_cache(maxsize=None)
def _cover_cached(name: str) -> CoverData:
    return _build_cover(name)


def cover(name: str) -> CoverData:
    return _cover_cached(name.removeprefix("builtin:"))


def rh_cover_names() -> list[str]:
    """The ramified built-in covers used for functoriality and sign determination."""
    return (["squaring"] + [f"hyperelliptic{g}" for g in range(2, MAX_GENUS + 1)]
            + ["conic", "component-squaring"])


def cover_names() -> list[str]:
    return rh_cover_names() + ["hyperelliptic1", "identity", "identity-marked", "etale"]


# -- rewrite examples -----------------------------------------------------------


@dataclass(frozen=True)
class RewriteExample:
    name: str
    model: ChowModel
    arrangement: Arrangement
    exponent: tuple[int, ...]
    rules: RewriteRuleSet


def _chain_rules(cls: str) -> list[dict]:
    # D ~ E1 + E2, E1 ~ E3, E1 ~ E4, E2 ~ E5, E2 ~ E6, E3 ~ E7, E5 ~ E8
    def r(lhs, *labels):
        return {"lhs": lhs, "rhs": [{"coeff": "1", "label": lab, "class": cls} for lab in labels]}

    return [r("D", "E1", "E2"), r("E1", "E3"), r("E1", "E4"), r("E2", "E5"),
            r("E2", "E6"), r("E3", "E7"), r("E5", "E8")]


_REWRITES: dict[str, Callable[[], RewriteExample]] = {}


def _register(name):
    def deco(fn):
        _REWRITES[name] = fn
        return fn
    return deco


@_register("quadric-chain")
def _quadric_chain() -> RewriteExample:
    # D is a quadric so that D = E1 + E2 holds with hyperplane classes
    m = model("p4")
    arr = Arrangement.of(m, [("D", "2*H")])
    return RewriteExample("quadric-chain", m, arr, (2,), rules_from_list(_chain_rules("H"), arr.labels))


@_register("p2-line")
def _p2_line() -> RewriteExample:
    m = model("p2")
    arr = Arrangement.of(m, [("D", "H")])
    rules = [{"lhs": "D", "rhs": [{"coeff": "1", "label": "E1", "class": "H"}]}]
    return RewriteExample("p2-line", m, arr, (2,), rules_from_list(rules, arr.labels))


@_register("p2-conic")
def _p2_conic() -> RewriteExample:
    m = model("p2")
    arr = Arrangement.of(m, [("D", "2*H"), ("L", "H")])
    rules = [
        {"lhs": "D", "rhs": [{"coeff": "1", "label": "E1", "class": "H"},
                             {"coeff": "1/2", "label": "E2", "class": "2*H"}]},
    ]
    return RewriteExample("p2-conic", m, arr, (2, 0), rules_from_list(rules, arr.labels))


@_register("p3-cube")
def _p3_cube() -> RewriteExample:
    m = model("p3")
    arr = Arrangement.of(m, [("D", "H")])
    rules = [
        {"lhs": "D", "rhs": [{"coeff": "1/2", "label": "E1", "class": "2*H"}]},
        {"lhs": "D", "rhs": [{"coeff": "1", "label": "E2", "class": "H"}]},
        {"lhs": "E1", "rhs": [{"coeff": "2", "label": "E3", "class": "H"}]},
    ]
    return RewriteExample("p3-cube", m, arr, (3,), rules_from_list(rules, arr.labels))


@lru_cache(maxsize=None)
def _rewrite_cached(name: str) -> RewriteExample:
    try:
        return _REWRITES[name]()
    except KeyError:
        raise ModelError(f"unknown built-in rewrite example {name!r}") from None


def rewrite_example(name: str) -> RewriteExample:
    return _rewrite_cached(name.removeprefix("builtin:"))


def rewrite_example_names() -> list[str]:
    return list(_REWRITES)
