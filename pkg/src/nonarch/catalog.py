"""The worked examples as ready-made objects."""

from __future__ import annotations

from fractions import Fraction

from .double import build_counterexample, counterexample_weights
from .field import epsilon, from_rational, omega
from .power import AffineBound, PowerSeries

__all__ = [
    "nonsubstitution_pair",
    "blowup_pair",
    "build_counterexample",
    "counterexample_weights",
]


def nonsubstitution_pair() -> tuple[PowerSeries, PowerSeries]:
    """(T, S) with T = sum (X/e)^i and S = e/(1-e) - X - X^2 - ...

    S(e) = 0, so T(S(e)) = 1, yet the expected coefficient d_0 diverges.
    """
    e, w = epsilon(), omega()
    a0 = e / (1 - e)
    minus_one = from_rational(-1)
    S = PowerSeries(lambda j: a0 if j == 0 else minus_one, AffineBound(Fraction(0), Fraction(0)),
                    name="e/(1-e) - sum_{j>=1} X^j")
    T = PowerSeries(lambda i: w ** i, AffineBound(Fraction(-1), Fraction(0)), name="sum (X/e)^i")
    return T, S


def blowup_pair(a2=None) -> tuple[PowerSeries, PowerSeries]:
    """(T, S) with T = sum X^n and S = e - w X + a2 X^2 + sum_{n>=3} e^n X^n.

    ``a2`` defaults to w^2.  With that coefficient S(1) keeps the infinite part
    w^2 - w, so T diverges at S(1); ``a2 = w`` gives S(1) = e + sum_{n>=3} e^n.
    """
    e, w = epsilon(), omega()
    a2 = w ** 2 if a2 is None else a2
    head = {0: e, 1: -w, 2: a2}

    def coeff(j):
        if j in head:
            return head[j]
        return e ** j

    # v(a_j) >= j - 4 holds for j = 0, 1, 2 (valuations 1, -1, >= -2) and j >= 3
    S = PowerSeries(coeff, AffineBound(Fraction(1), Fraction(-4)),
                    name=f"e - wX + ({a2})X^2 + sum e^n X^n")
    return PowerSeries.geometric(), S

