"""Chern character, Todd class and the Riemann-Roch functional.

Both classes are computed from formal Chern roots: the elementary symmetric
inputs are converted to power sums by Newton's identities, and the
multiplicative class is ``exp(sum_k s_k p_k)`` where ``sum_k s_k x^k`` is the
logarithm of the one-variable generating series.  Nothing here is tabulated.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

from .exactring import ChowModel, GradedElement, ModelError, format_rational, free_model

__all__ = [
    "SheafClass",
    "SequenceKind",
    "todd_coefficients",
    "todd_log_coefficients",
    "power_sums",
    "todd_series",
    "chern_character",
    "q_value",
    "q_polynomial",
    "q_polynomial_report",
]


class SequenceKind(enum.Enum):
    TODD = "todd"
    TOP = "top"


@dataclass(frozen=True)
class SheafClass:
    """Rank plus Chern classes ``c_1, c_2, ...`` standing in for a coherent sheaf."""

    rank: int
    chern: tuple[GradedElement, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "chern", tuple(self.chern))
        for i, c in enumerate(self.chern, start=1):
            if not c.is_homogeneous(i):
                raise ModelError(f"sheaf Chern class c_{i} is not of pure degree {i}")

    def c(self, i: int, model: ChowModel) -> GradedElement:
        if i == 0:
            return model.one()
        if i <= len(self.chern):
            return self.chern[i - 1]
        return model.zero()

    @classmethod
    def trivial(cls, rank: int = 1) -> "SheafClass":
        return cls(rank, ())

    @classmethod
    def line_bundle(cls, c1: GradedElement) -> "SheafClass":
        return cls(1, (c1,))


# -- one-variable series ----------------------------------------------------


def _series_inverse(a: list[Fraction], n: int) -> list[Fraction]:
    b = [Fraction(0)] * (n + 1)
    b[0] = 1 / a[0]
    for k in range(1, n + 1):
        s = sum(a[j] * b[k - j] for j in range(1, min(k, len(a) - 1) + 1))
        b[k] = -s / a[0]
    return b


def _series_log(a: list[Fraction], n: int) -> list[Fraction]:
    """log of a series with constant term 1, via (log a)' = a'/a."""
    inv = _series_inverse(a, n)
    da = [(k + 1) * a[k + 1] for k in range(n)] + [Fraction(0)]
    q = [sum(da[j] * inv[k - j] for j in range(k + 1)) for k in range(n)]
    return [Fraction(0)] + [q[k - 1] / k for k in range(1, n + 1)]


@lru_cache(maxsize=None)
def todd_coefficients(n: int) -> tuple[Fraction, ...]:
    """Coefficients of ``x / (1 - e^{-x})`` up to ``x^n``."""
    # (1 - e^{-x}) / x = sum_k (-1)^k x^k / (k+1)!
    a = [Fraction((-1) ** k, factorial(k + 1)) for k in range(n + 1)]
    return tuple(_series_inverse(a, n))


@lru_cache(maxsize=None)
def todd_log_coefficients(n: int) -> tuple[Fraction, ...]:
    return tuple(_series_log(list(todd_coefficients(n)), n))


# -- graded machinery -------------------------------------------------------


def _check_graded(y: Sequence[GradedElement], model: ChowModel):
    for i, c in enumerate(y, start=1):
        if c.model is not model:
            raise ModelError("class from a different model")
        if not c.is_homogeneous(i):
            raise ModelError(f"argument y_{i} = {c} is not of pure degree {i}")


def power_sums(e: Sequence[GradedElement], model: ChowModel, n: int | None = None) -> list[GradedElement]:
    """Newton's identities: ``p_1..p_n`` from elementary symmetric ``e_1..``.

    ``p_k = sum_{i<k} (-1)^{i-1} e_i p_{k-i} + (-1)^{k-1} k e_k``.
    """
    n = model.dimension if n is None else n

    def ei(i):
        return e[i - 1] if i <= len(e) else model.zero()

    p: list[GradedElement] = [model.zero()]
    for k in range(1, n + 1):
        acc = ei(k) * ((-1) ** (k - 1) * k)
        for i in range(1, k):
            if ei(i).is_zero() or p[k - i].is_zero():
                continue
            acc = acc + ei(i) * p[k - i] * ((-1) ** (i - 1))
        p.append(acc)
    return p


def _exp_nilpotent(z: GradedElement) -> GradedElement:
    model = z.model
    out = model.one()
    term = model.one()
    for j in range(1, model.dimension + 1):
        term = term * z * Fraction(1, j)
        if term.is_zero():
            break
        out = out + term
    return out


def todd_series(y: Sequence[GradedElement], model: ChowModel) -> GradedElement:
    """Todd class with Chern-class arguments ``y_1..y_n`` (``y_i`` of degree ``i``)."""
    _check_graded(y, model)
    n = model.dimension
    p = power_sums(y, model, n)
    s = todd_log_coefficients(n)
    z = model.zero()
    for k in range(1, n + 1):
        if s[k] and not p[k].is_zero():
            z = z + p[k] * s[k]
    return _exp_nilpotent(z)


def chern_character(s: SheafClass, model: ChowModel) -> GradedElement:
    """``rk + sum_k p_k / k!`` with ``p_k`` the power sums of the Chern roots."""
    n = model.dimension
    chern = [s.c(i, model) for i in range(1, n + 1)]
    _check_graded(chern, model)
    p = power_sums(chern, model, n)
    out = model.one() * s.rank
    for k in range(1, n + 1):
        out = out + p[k] * Fraction(1, factorial(k))
    return out


def q_value(s: SheafClass, y: Sequence[GradedElement], model: ChowModel,
            kind: SequenceKind = SequenceKind.TODD) -> Fraction:
    """Evaluate ``Q_n(ch(s); y)`` and integrate over ``model``."""
    if kind is SequenceKind.TOP:
        n = model.dimension
        _check_graded(y, model)
        if n == 0:
            return model.integrate(model.one())
        top = y[n - 1] if len(y) >= n else model.zero()
        return model.integrate(top)
    return model.integrate(chern_character(s, model) * todd_series(y, model))


# -- symbolic report ---------------------------------------------------------


@lru_cache(maxsize=None)
def _report_model(n: int) -> ChowModel:
    gens = [(f"x{i}", i) for i in range(1, n + 1)] + [(f"y{i}", i) for i in range(1, n + 1)]
    return free_model(f"Q{n}", gens, n)


def q_polynomial(n: int) -> dict[str, Fraction]:
    """``Q_n`` as a map from monomial text over ``x0..xn, y1..yn`` to coefficient.

    ``x0`` only enters through the constant term of the Chern character, so it
    is carried as a formal multiplier of ``deg_n Todd(y)``.
    """
    return {_term_text(names, m): c for (names, m), c in _q_terms(n).items()}


def _term_text(names: tuple[str, ...], m: tuple[int, ...]) -> str:
    parts = [nm if e == 1 else f"{nm}^{e}" for nm, e in zip(names, m) if e]
    return "*".join(parts) if parts else "1"


@lru_cache(maxsize=None)
def _q_terms(n: int) -> dict:
    if n < 0:
        raise ValueError("n must be >= 0")
    names = ("x0",) + tuple(f"x{i}" for i in range(1, n + 1)) + tuple(f"y{i}" for i in range(1, n + 1))
    if n == 0:
        return {(names, (1,)): Fraction(1)}
    R = _report_model(n)
    xs = [R.gen(f"x{i}") for i in range(1, n + 1)]
    ys = [R.gen(f"y{i}") for i in range(1, n + 1)]
    todd = todd_series(ys, R)
    ch_rest = chern_character(SheafClass(0, tuple(xs)), R)
    out = {}
    for m, c in todd.degree_part(n).terms.items():
        out[(names, (1,) + m)] = c
    for m, c in (ch_rest * todd).degree_part(n).terms.items():
        out[(names, (0,) + m)] = c
    return out


def q_polynomial_report(n: int) -> str:
    """Normalized text of ``Q_n`` for ``0 <= n <= 4``.

    Terms are grouped by the weighted degree of their ``x`` part (``x0`` first)
    and sorted lexicographically inside each group.
    """
    if not 0 <= n <= 4:
        raise ValueError("report mode supports 0 <= n <= 4")
    terms = _q_terms(n)

    def key(item):
        (names, m), _ = item
        xdeg = sum(i * e for i, e in enumerate(m[: n + 1]))
        return (xdeg, 0 if m[0] else 1, tuple(-e for e in m))

    out = []
    for (names, m), c in sorted(terms.items(), key=key):
        mono = _term_text(names, m)
        mag = abs(c)
        body = mono if mag == 1 else f"{format_rational(mag)}*{mono}"
        if not out:
            out.append(body if c > 0 else f"-{body}")
        else:
            out.append(("+ " if c > 0 else "- ") + body)
    return " ".join(out)
