"""Seeded generators of random elements, streams, arrays and power series.

Everything drawn here satisfies the theorems' hypotheses by construction:
streams and arrays carry valid tail bounds, and power series carry valid
affine valuation bounds.  Generators are deterministic in their seed so
reports built from them are reproducible.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

from .double import DoubleArray
from .field import ZERO, FieldElement, epsilon, from_rational
from .power import AffineBound, PowerSeries
from .series import TermStream

__all__ = [
    "small_rational",
    "random_element",
    "random_laurent",
    "random_stream",
    "random_array",
    "random_power_series",
]

_E = epsilon()


def small_rational(rng: random.Random, nonzero: bool = False) -> Fraction:
    while True:
        q = Fraction(rng.randint(-9, 9), rng.randint(1, 6))
        if q or not nonzero:
            return q


def random_laurent(rng: random.Random, low: int = -3, terms: int = 4) -> FieldElement:
    start = rng.randint(low, low + 4)
    return FieldElement.from_laurent(start, [small_rational(rng) for _ in range(rng.randint(1, terms))])


def random_element(rng: random.Random, allow_zero: bool = True) -> FieldElement:
    """A Laurent polynomial, sometimes divided by 1 + (polynomial with zero constant term)."""
    while True:
        num = random_laurent(rng)
        if rng.random() < 0.5:
            den = FieldElement.from_laurent(0, [Fraction(1)] + [small_rational(rng)
                                                                  for _ in range(rng.randint(1, 3))])
            num = num / den
        if allow_zero or num:
            return num


def random_stream(seed) -> TermStream:
    """Terms q_n e^(floor(n / r) + d_n) with a matching tail bound, r in {1, 2, 3}."""
    rng = random.Random(f"stream:{seed}")
    r = rng.choice([1, 2, 3])
    shift = rng.randint(-2, 2)

    @lru_cache(maxsize=None)
    def term(n):
        local = random.Random(f"stream:{seed}:{n}")
        q = small_rational(local)
        if not q:
            return ZERO
        return FieldElement.monomial(q, n // r + shift + local.randint(0, 2))

    return TermStream(term, lambda n: n // r + shift)


def random_array(seed) -> DoubleArray:
    """Entries q e^(i + j + d) with small rational q and d in {0, 1, 2}."""

    @lru_cache(maxsize=None)
    def entry(i, j):
        local = random.Random(f"array:{seed}:{i}:{j}")
        q = small_rational(local)
        if not q:
            return ZERO
        return FieldElement.monomial(q, i + j + local.randint(0, 2))

    return DoubleArray(entry, lambda n: n)


def random_power_series(seed, slope: int = 1, intercept: int = 0, zero_constant: bool = False,
                        rational: bool = False) -> PowerSeries:
    """a_j = q_j e^(slope j + intercept + d_j), optionally times 1/(1 - c e)."""

    def coeff(j):
        local = random.Random(f"series:{seed}:{j}")
        q = small_rational(local)
        if not q or (zero_constant and j == 0):
            return ZERO
        a = FieldElement.monomial(q, slope * j + intercept + local.randint(0, 1))
        if rational and local.random() < 0.3:
            a = a / (1 - from_rational(local.randint(1, 3)) * _E)
        return a

    return PowerSeries(coeff, AffineBound(Fraction(slope), Fraction(intercept)), name=f"random-{seed}")
