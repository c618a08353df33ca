"""Independent reference implementations used as test oracles.

Nothing here imports the package's arithmetic: rational functions are kept as
pairs of {exponent: Fraction} dicts, compared by cross-multiplication, and
expanded by naive long division.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product


def dmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (i, x), (j, y) in product(a.items(), b.items()):
        out[i + j] = out.get(i + j, 0) + x * y
    return {k: v for k, v in out.items() if v}


def dadd(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + sign * v
    return {k: v for k, v in out.items() if v}


class RF:
    """num/den with Laurent-polynomial dicts; no normal form."""

    def __init__(self, num: dict, den: dict | None = None):
        self.num = {k: Fraction(v) for k, v in num.items() if v}
        self.den = {k: Fraction(v) for k, v in (den or {0: 1}).items() if v}
        assert self.den, "zero denominator"

    @classmethod
    def of(cls, element) -> "RF":
        """From a package element, reading only its public fields."""
        num = {element.shift + k: c for k, c in enumerate(element.num)}
        den = {k: c for k, c in enumerate(element.den)}
        return cls(num, den)

    @classmethod
    def const(cls, q) -> "RF":
        return cls({0: Fraction(q)})

    def __add__(self, o):
        o = _lift(o)
        return RF(dadd(dmul(self.num, o.den), dmul(o.num, self.den)), dmul(self.den, o.den))

    def __sub__(self, o):
        o = _lift(o)
        return RF(dadd(dmul(self.num, o.den), dmul(o.num, self.den), -1), dmul(self.den, o.den))

    def __mul__(self, o):
        o = _lift(o)
        return RF(dmul(self.num, o.num), dmul(self.den, o.den))

    def __truediv__(self, o):
        o = _lift(o)
        assert o.num, "division by zero"
        return RF(dmul(self.num, o.den), dmul(self.den, o.num))

    def __pow__(self, n: int):
        out = RF.const(1)
        base = self if n >= 0 else RF.const(1) / self
        for _ in range(abs(n)):
            out = out * base
        return out

    def __eq__(self, o):
        o = _lift(o)
        return dmul(self.num, o.den) == dmul(o.num, self.den)

    def is_zero(self) -> bool:
        return not self.num

    def valuation(self):
        if not self.num:
            return math.inf
        return min(self.num) - min(self.den)

    def sign(self) -> int:
        if not self.num:
            return 0
        lead = self.num[min(self.num)] / self.den[min(self.den)]
        return 1 if lead > 0 else -1

    def coefficients(self, lo: int, hi: int) -> list:
        """Laurent coefficients for exponents lo..hi-1 (lo must be <= valuation)."""
        d0 = min(self.den)
        den = {k - d0: v for k, v in self.den.items()}
        num = {k - d0: v for k, v in self.num.items()}
        # solve den * c = num term by term, c indexed from lo
        c: dict = {}
        lead = den[0]
        for k in range(lo, hi):
            acc = num.get(k, Fraction(0))
            for m, dv in den.items():
                if m and (k - m) in c:
                    acc -= dv * c[k - m]
            c[k] = acc / lead
        return [c[k] for k in range(lo, hi)]


def _lift(o) -> RF:
    if isinstance(o, RF):
        return o
    if isinstance(o, (int, Fraction)):
        return RF.const(o)
    return RF.of(o)


def eps(k: int = 1) -> RF:
    return RF({k: 1})


def geometric_sum(ratio: RF, N: int) -> RF:
    """1 + r + ... + r^N by repeated addition."""
    total, term = RF.const(0), RF.const(1)
    for _ in range(N + 1):
        total = total + term
        term = term * ratio
    return total


def partitions_brute(n: int) -> list:
    """Set partitions of {1..n} by inserting each element into every block or a new one."""
    parts = [[]]
    for k in range(1, n + 1):
        nxt = []
        for p in parts:
            for b in range(len(p)):
                nxt.append([blk + [k] if idx == b else list(blk) for idx, blk in enumerate(p)])
            nxt.append([list(blk) for blk in p] + [[k]])
        parts = nxt
    return parts


def stirling2(n: int, k: int) -> int:
    if n == k == 0:
        return 1
    if n == 0 or k == 0:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def poly_compose_coeffs(outer: list, inner: list, upto: int) -> list:
    """Coefficients 0..upto of outer(inner(X)) for coefficient lists of RF."""
    def mul(a, b):
        out = [RF.const(0) for _ in range(upto + 1)]
        for i, x in enumerate(a[: upto + 1]):
            if x.is_zero():
                continue
            for j, y in enumerate(b[: upto + 1 - i]):
                if not y.is_zero():
                    out[i + j] = out[i + j] + x * y
        return out

    result = [RF.const(0) for _ in range(upto + 1)]
    power = [RF.const(1)] + [RF.const(0) for _ in range(upto)]
    for b in outer:
        for j in range(upto + 1):
            if not b.is_zero() and not power[j].is_zero():
                result[j] = result[j] + b * power[j]
        power = mul(power, inner)
    return result
