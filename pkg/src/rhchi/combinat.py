"""Monomial exponents, the constants delta and lambda, and ordered coprime factorizations.

Exponents are plain tuples of naturals indexed by an arrangement's labels.
Everything that only depends on the monomial type (the sorted multiset of
nonzero entries) is memoized on that type; the raw tuple enumerator is kept as
the slow reference.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterator, Sequence

from .charclass import todd_coefficients, todd_series
from .exactring import elementary_symmetric, free_model

Exponent = tuple

__all__ = [
    "monomial_type",
    "weight",
    "is_mf",
    "tilde",
    "hat",
    "support",
    "disjoint",
    "sub_exponents",
    "delta",
    "delta_from_q",
    "ordered_factorizations",
    "signed_count",
    "signed_count_by_enumeration",
    "lambda_",
    "lambda_by_factorizations",
    "types_of_weight",
]


def monomial_type(b: Sequence[int]) -> tuple[int, ...]:
    return tuple(sorted((x for x in b if x), reverse=True))


def weight(b: Sequence[int]) -> int:
    return sum(b)


def is_mf(b: Sequence[int]) -> bool:
    return all(x <= 1 for x in b)


def tilde(b: Sequence[int]) -> Exponent:
    return tuple(min(1, x) for x in b)


def hat(b: Sequence[int]) -> Exponent:
    return tuple(1 if x == 1 else 0 for x in b)


def support(b: Sequence[int]) -> frozenset[int]:
    return frozenset(i for i, x in enumerate(b) if x)


def disjoint(a: Sequence[int], b: Sequence[int]) -> bool:
    return not any(x and y for x, y in zip(a, b))


def sub_exponents(b: Sequence[int], *, min_weight: int = 0) -> Iterator[Exponent]:
    """All ``a <= b`` componentwise."""
    for a in itertools.product(*(range(x + 1) for x in b)):
        if sum(a) >= min_weight:
            yield a


def types_of_weight(w: int) -> list[tuple[int, ...]]:
    """Integer partitions of ``w`` as non-increasing tuples (the monomial types)."""

    def rec(rest, cap):
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, cap), 0, -1):
            for tail in rec(rest - first, first):
                yield (first,) + tail

    return list(rec(w, w))


# -- delta ---------------------------------------------------------------------


@lru_cache(maxsize=None)
def _delta_of_type(t: tuple[int, ...]) -> Fraction:
    # Expand prod_i f(D_i) over the box below D^t, where f(x) = x/(1-e^{-x}).
    f = todd_coefficients(max(t, default=0))
    box: dict[tuple[int, ...], Fraction] = {(): Fraction(1)}
    for ti in t:
        nxt = {}
        for m, c in box.items():
            for e in range(ti + 1):
                if f[e]:
                    nxt[m + (e,)] = c * f[e]
        box = nxt
    return box.get(tuple(t), Fraction(0))


def delta(b: Sequence[int]) -> Fraction:
    """Coefficient of ``D^b`` in ``prod_D D / (1 - e^{-D})``; depends only on the type."""
    return _delta_of_type(monomial_type(b))


@lru_cache(maxsize=None)
def _delta_from_q_type(t: tuple[int, ...]) -> Fraction:
    w = sum(t)
    if w == 0:
        return Fraction(1)
    R = free_model(f"div{len(t)}", [(f"D{i}", 1) for i in range(1, len(t) + 1)], w)
    ds = R.gens()
    elem = [elementary_symmetric(ds, k, R) for k in range(1, w + 1)]
    return todd_series(elem, R).coefficient(tuple(t))


def delta_from_q(b: Sequence[int]) -> Fraction:
    """delta as the coefficient of ``D^b`` in ``Q_|b|(1; Delta_1, ..., Delta_|b|)``."""
    return _delta_from_q_type(monomial_type(b))


# -- factorizations ------------------------------------------------------------


def _ordered_set_partitions(items: tuple) -> Iterator[tuple[tuple, ...]]:
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for part in _ordered_set_partitions(rest):
        # put ``first`` into an existing block, or as a new block at any position
        for i in range(len(part)):
            yield part[:i] + ((first,) + part[i],) + part[i + 1:]
        for i in range(len(part) + 1):
            yield part[:i] + ((first,),) + part[i:]


def ordered_factorizations(b: Sequence[int]) -> list[tuple[Exponent, ...]]:
    """Tuples ``(b_1..b_k)`` summing to ``b`` with disjoint nonempty supports, only ``b_k`` possibly NMF.

    For ``b = 0`` the single empty tuple is returned (the ``k = 0`` term).
    """
    b = tuple(b)
    ell = len(b)
    singles = tuple(i for i, x in enumerate(b) if x == 1)
    heavy = tuple(i for i, x in enumerate(b) if x >= 2)

    def vec(block):
        v = [0] * ell
        for i in block:
            v[i] = b[i]
        return tuple(v)

    out = []
    if not heavy:
        for osp in _ordered_set_partitions(singles):
            out.append(tuple(vec(block) for block in osp))
        return out
    for r in range(len(singles) + 1):
        for extra in itertools.combinations(singles, r):
            last = vec(heavy + extra)
            rest = tuple(i for i in singles if i not in extra)
            for osp in _ordered_set_partitions(rest):
                out.append(tuple(vec(block) for block in osp) + (last,))
    return out


def signed_count_by_enumeration(b: Sequence[int]) -> int:
    return sum((-1) ** (len(f) + 1) for f in ordered_factorizations(b))


@lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


def _osp_signed(m: int, shift: int) -> int:
    # sum over ordered set partitions of m items into j blocks of (-1)^(j+shift)
    return sum((-1) ** (j + shift) * factorial(j) * _stirling2(m, j) for j in range(m + 1))


@lru_cache(maxsize=None)
def _signed_count_of_type(t: tuple[int, ...]) -> int:
    singles = sum(1 for x in t if x == 1)
    heavy = len(t) - singles
    if not heavy:
        return _osp_signed(singles, 1)
    # last block holds every heavy index plus some of the singles
    return sum(comb(singles, r) * _osp_signed(singles - r, 2) for r in range(singles + 1))


def signed_count(b: Sequence[int]) -> int:
    """``sum_k (-1)^(k+1) #{length-k ordered factorizations of b}``, memoized by type."""
    return _signed_count_of_type(monomial_type(b))


# -- lambda --------------------------------------------------------------------


def lambda_(b: Sequence[int]) -> Fraction:
    return delta(b) * signed_count(b)


def lambda_by_factorizations(b: Sequence[int]) -> Fraction:
    """lambda from its defining sum over ordered factorizations."""
    total = Fraction(0)
    for f in ordered_factorizations(b):
        term = Fraction((-1) ** (len(f) + 1))
        for part in f:
            term *= delta(part)
        total += term
    return total
