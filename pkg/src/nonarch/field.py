"""Exact arithmetic in Q((e)), the completion of Q(e) with e a positive infinitesimal.

Elements are stored as reduced rational functions ``e^shift * num(e) / den(e)``
where ``num`` and ``den`` are ordinary polynomials over Q with nonzero constant
terms and ``den(0) == 1``.  That canonical form makes structural equality
coincide with equality in the field, so ``==`` and ``hash`` are exact.

Laurent expansions (``expand``) realize the embedding into formal Laurent
series; they are only needed for printing, truncation and for the series
machinery built on top of this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Sequence, Union

__all__ = [
    "VAL_INF",
    "FieldElement",
    "Expansion",
    "from_rational",
    "epsilon",
    "omega",
    "valuation",
    "compare",
    "abs_",
    "is_topologically_nilpotent",
    "expand",
    "laurent",
    "fsum",
    "fdot",
]

#: Valuation of zero.  Compares greater than every integer and absorbs addition.
VAL_INF = math.inf

Poly = tuple  # tuple[Fraction, ...], index = exponent, no trailing zeros

_ZERO = Fraction(0)
_ONE = Fraction(1)

Number = Union[int, Fraction, "FieldElement"]


# -- dense polynomial helpers over Q ---------------------------------------

def _trim(p: Sequence[Fraction]) -> Poly:
    n = len(p)
    while n and not p[n - 1]:
        n -= 1
    return tuple(p[:n])


def _padd(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for k, c in enumerate(b):
        out[k] += c
    return _trim(out)


def _psub(a: Poly, b: Poly) -> Poly:
    out = list(a) + [_ZERO] * (len(b) - len(a))
    for k, c in enumerate(b):
        out[k] -= c
    return _trim(out)


def _pmul(a: Poly, b: Poly, limit: int | None = None) -> Poly:
    if not a or not b:
        return ()
    if len(a) == 1:
        c = a[0]
        out = [c * y for y in b]
        return _trim(out[:limit] if limit is not None else out)
    if len(b) == 1:
        c = b[0]
        out = [x * c for x in a]
        return _trim(out[:limit] if limit is not None else out)
    n = len(a) + len(b) - 1
    if limit is not None:
        n = min(n, limit)
        if n <= 0:
            return ()
    out = [_ZERO] * n
    for i, x in enumerate(a):
        if i >= n:
            break
        if not x:
            continue
        for k, y in enumerate(b[: n - i]):
            out[i + k] += x * y
    return _trim(out)


def _pscale(a: Poly, c: Fraction) -> Poly:
    if not c:
        return ()
    return tuple(x * c for x in a)


def _pdivmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    db = len(b) - 1
    if len(a) - 1 < db:
        return (), a
    rem = list(a)
    lead = b[-1]
    quot = [_ZERO] * (len(a) - db)
    for k in range(len(a) - 1 - db, -1, -1):
        c = rem[k + db] / lead
        quot[k] = c
        if c:
            for t, y in enumerate(b):
                rem[k + t] -= c * y
    return _trim(quot), _trim(rem[:db])


def _monic(a: Poly) -> Poly:
    lead = a[-1]
    return a if lead == 1 else tuple(x / lead for x in a)


def _pgcd(a: Poly, b: Poly) -> Poly:
    # monic remainders keep the coefficient growth in check
    if not b:
        return _monic(a) if a else ()
    a, b = _monic(a) if a else (), _monic(b)
    while b:
        r = _pdivmod(a, b)[1]
        a, b = b, (_monic(r) if r else ())
    return a


# denominators repeat a lot in sums, so their gcds are worth remembering
_den_gcd = lru_cache(maxsize=4096)(_pgcd)


def _pexact(a: Poly, b: Poly) -> Poly:
    q, r = _pdivmod(a, b)
    assert not r, "inexact polynomial division"
    return q


def _low_zeros(p: Poly) -> int:
    k = 0
    while k < len(p) and not p[k]:
        k += 1
    return k


def _series_div(num: Poly, den: Poly, count: int) -> list[Fraction]:
    """First ``count`` coefficients of num/den as a power series (den[0] == 1)."""
    out: list[Fraction] = []
    for k in range(count):
        c = num[k] if k < len(num) else _ZERO
        for t in range(1, min(k, len(den) - 1) + 1):
            if out[k - t]:
                c -= den[t] * out[k - t]
        out.append(c)
    return out


def _as_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, (int, Rational)):
        return Fraction(q)
    raise TypeError(f"not a rational: {q!r}")


# -- field elements --------------------------------------------------------

class FieldElement:
    """Immutable element of Q((e)) in reduced rational-function form."""

    __slots__ = ("shift", "num", "den", "_hash")

    shift: int
    num: Poly
    den: Poly

    def __init__(self, value: Union[int, Fraction, str, "FieldElement"] = 0):
        if isinstance(value, FieldElement):
            self._set(value.shift, value.num, value.den)
        elif isinstance(value, str):
            from .parser import parse_element

            other = parse_element(value)
            self._set(other.shift, other.num, other.den)
        else:
            q = _as_fraction(value)
            self._set(0, (q,) if q else (), (_ONE,))

    def _set(self, shift: int, num: Poly, den: Poly) -> None:
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    @classmethod
    def _raw(cls, shift: int, num: Poly, den: Poly) -> "FieldElement":
        obj = cls.__new__(cls)
        obj._set(shift, num, den)
        return obj

    @classmethod
    def _make(cls, shift: int, num: Sequence[Fraction], den: Sequence[Fraction],
              reduce: bool = True) -> "FieldElement":
        num = _trim(num)
        den = _trim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return ZERO
        k = _low_zeros(num)
        if k:
            num = num[k:]
            shift += k
        k = _low_zeros(den)
        if k:
            den = den[k:]
            shift -= k
        if reduce and len(den) > 1 and len(num) > 0:
            g = _pgcd(num, den)
            if len(g) > 1:
                num = _pexact(num, g)
                den = _pexact(den, g)
        c = den[0]
        if c != 1:
            num = tuple(x / c for x in num)
            den = tuple(x / c for x in den)
        return cls._raw(shift, num, den)

    @classmethod
    def from_laurent(cls, shift: int, coeffs: Iterable) -> "FieldElement":
        """Laurent polynomial ``sum(coeffs[k] * e^(shift + k))``."""
        return cls._make(shift, [_as_fraction(c) for c in coeffs], (_ONE,), reduce=False)

    @classmethod
    def monomial(cls, coeff, exponent: int) -> "FieldElement":
        q = _as_fraction(coeff)
        if not q:
            return ZERO
        return cls._raw(exponent, (q,), (_ONE,))

    # -- predicates and accessors

    def is_zero(self) -> bool:
        return not self.num

    def is_laurent_polynomial(self) -> bool:
        return len(self.den) == 1

    def is_rational(self) -> bool:
        return self.is_zero() or (self.shift == 0 and len(self.num) == 1 and len(self.den) == 1)

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational constant")
        return self.num[0] if self.num else _ZERO

    def as_int(self) -> int:
        q = self.as_fraction()
        if q.denominator != 1:
            raise ValueError(f"{self} is not an integer")
        return q.numerator

    @property
    def valuation(self):
        return self.shift if self.num else VAL_INF

    @property
    def leading_coefficient(self) -> Fraction:
        return self.num[0] if self.num else _ZERO

    def sign(self) -> int:
        if not self.num:
            return 0
        return 1 if self.num[0] > 0 else -1

    # -- arithmetic

    @staticmethod
    def _coerce(other) -> "FieldElement":
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, (int, Fraction, Rational)):
            return from_rational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            return self
        if not self.num:
            return other
        lo = min(self.shift, other.shift)
        a = (_ZERO,) * (self.shift - lo) + self.num
        b = (_ZERO,) * (other.shift - lo) + other.num
        d1, d2 = self.den, other.den
        if len(d1) == 1 and len(d2) == 1:
            return FieldElement._make(lo, _padd(a, b), d1, reduce=False)
        # with g = gcd(d1, d2), any common factor of the new numerator and
        # denominator divides g, so only that small gcd is needed
        g = d1 if d1 == d2 else _den_gcd(d1, d2)
        if len(g) > 1:
            d1, d2 = _pexact(d1, g), _pexact(d2, g)
        num = _padd(_pmul(a, d2), _pmul(b, d1))
        den = _pmul(self.den, d2)
        if num and len(g) > 1:
            h = _pgcd(num, g)
            if len(h) > 1:
                num, den = _pexact(num, h), _pexact(den, h)
        return FieldElement._make(lo, num, den, reduce=False)

    __radd__ = __add__

    def __neg__(self):
        if not self.num:
            return self
        return FieldElement._raw(self.shift, tuple(-x for x in self.num), self.den)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.num or not other.num:
            return ZERO
        shift = self.shift + other.shift
        if len(self.den) == 1 and len(other.den) == 1:
            return FieldElement._raw(shift, _pmul(self.num, other.num), (_ONE,))
        # cross-cancel as both operands are already reduced
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        g = _pgcd(n1, d2) if len(d2) > 1 else (_ONE,)
        if len(g) > 1:
            n1, d2 = _pexact(n1, g), _pexact(d2, g)
        g = _pgcd(n2, d1) if len(d1) > 1 else (_ONE,)
        if len(g) > 1:
            n2, d1 = _pexact(n2, g), _pexact(d1, g)
        return FieldElement._make(shift, _pmul(n1, n2), _pmul(d1, d2), reduce=False)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if not self.num:
            raise ZeroDivisionError("inverse of zero")
        c = self.num[0]
        return FieldElement._raw(-self.shift, tuple(x / c for x in self.den),
                                 tuple(x / c for x in self.num))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return ONE
        if len(self.num) == 1 and len(self.den) == 1:
            return FieldElement._raw(self.shift * n, (self.num[0] ** n,), (_ONE,))
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- equality and order

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.shift == other.shift and self.num == other.num and self.den == other.den

    def __hash__(self):
        h = self._hash
        if h is None:
            if self.is_rational():
                h = hash(self.as_fraction())
            else:
                h = hash((self.shift, self.num, self.den))
            object.__setattr__(self, "_hash", h)
        return h

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() < 0

    def __le__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() <= 0

    def __gt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() > 0

    def __ge__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).sign() >= 0

    def __bool__(self):
        return bool(self.num)

    # -- expansions

    def expand(self, precision: int) -> "Expansion":
        return expand(self, precision)

    def truncate(self, precision: int) -> "FieldElement":
        """Laurent polynomial agreeing with ``self`` below e^precision."""
        if not self.num or self.shift >= precision:
            return ZERO
        if len(self.den) == 1 and self.shift + len(self.num) <= precision:
            return self
        count = precision - self.shift
        if len(self.den) == 1:
            return FieldElement._make(self.shift, self.num[:count], (_ONE,), reduce=False)
        return FieldElement._make(self.shift, _series_div(self.num, self.den, count),
                                  (_ONE,), reduce=False)

    # -- text form

    def __str__(self):
        if len(self.den) == 1:
            return _laurent_str(self.shift, self.num)
        return f"({_laurent_str(self.shift, self.num)})/({_laurent_str(0, self.den)})"

    def __repr__(self):
        return f"FieldElement('{self}')"


def _term_str(c: Fraction, k: int) -> str:
    if k == 0:
        return str(c)
    mono = "e" if k == 1 else f"e^{k}"
    if c == 1:
        return mono
    return f"{c}*{mono}"


def _laurent_str(shift: int, coeffs: Sequence[Fraction]) -> str:
    parts: list[str] = []
    for k, c in enumerate(coeffs):
        if not c:
            continue
        if not parts:
            parts.append(("-" + _term_str(-c, shift + k)) if c < 0 else _term_str(c, shift + k))
        else:
            op = " - " if c < 0 else " + "
            parts.append(op + _term_str(abs(c), shift + k))
    return "".join(parts) if parts else "0"


ZERO = FieldElement._raw(0, (), (_ONE,))
ONE = FieldElement._raw(0, (_ONE,), (_ONE,))


@dataclass(frozen=True)
class Expansion:
    """Truncated Laurent expansion: ``coeffs[k]`` multiplies e^(v0 + k), exact below ``precision``."""

    v0: int
    coeffs: tuple
    precision: int

    def coefficient(self, exponent: int) -> Fraction:
        if exponent >= self.precision:
            raise ValueError("exponent beyond expansion precision")
        k = exponent - self.v0
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return _ZERO

    def __str__(self):
        body = _laurent_str(self.v0, self.coeffs)
        tail = "O(1)" if self.precision == 0 else ("O(e)" if self.precision == 1 else f"O(e^{self.precision})")
        if body == "0":
            return tail
        return f"{body} + {tail}"


# -- module-level API ------------------------------------------------------

def _sum_fractions(items: list) -> FieldElement:
    # items: (shift, num, den) triples, not necessarily reduced
    if not items:
        return ZERO
    lo = min(t[0] for t in items)
    den: Poly = (_ONE,)
    for _, _, d in items:
        if len(d) == 1 or d == den:
            continue
        g = _den_gcd(den, d) if len(den) > 1 else (_ONE,)
        den = _pmul(den, _pexact(d, g) if len(g) > 1 else d)
    cofactor: dict = {}
    num: Poly = ()
    for shift, n, d in items:
        if d not in cofactor:
            cofactor[d] = den if len(d) == 1 else _pexact(den, d)
        num = _padd(num, _pmul((_ZERO,) * (shift - lo) + n, cofactor[d]))
    return FieldElement._make(lo, num, den, reduce=len(den) > 1)


def fsum(terms: Iterable) -> FieldElement:
    """Sum over a common denominator, reduced once at the end.

    Much cheaper than repeated ``+`` when the terms share denominator factors.
    """
    items = [t for t in (FieldElement._coerce(t) for t in terms) if t.num]
    if len(items) < 3:
        total = ZERO
        for t in items:
            total = total + t
        return total
    return _sum_fractions([(t.shift, t.num, t.den) for t in items])


def fdot(xs: Iterable, ys: Iterable) -> FieldElement:
    """sum x_k * y_k, skipping the per-product cancellation."""
    items = []
    for x, y in zip(xs, ys):
        x, y = FieldElement._coerce(x), FieldElement._coerce(y)
        if x.num and y.num:
            den = y.den if len(x.den) == 1 else (x.den if len(y.den) == 1 else _pmul(x.den, y.den))
            items.append((x.shift + y.shift, _pmul(x.num, y.num), den))
    return _sum_fractions(items)


def from_rational(q) -> FieldElement:
    q = _as_fraction(q)
    if not q:
        return ZERO
    if q == 1:
        return ONE
    return FieldElement._raw(0, (q,), (_ONE,))


def epsilon() -> FieldElement:
    return FieldElement._raw(1, (_ONE,), (_ONE,))


def omega() -> FieldElement:
    """The infinite element 1/e."""
    return FieldElement._raw(-1, (_ONE,), (_ONE,))


def laurent(coeffs: dict) -> FieldElement:
    """Build ``sum(c * e^k for k, c in coeffs.items())``."""
    if not coeffs:
        return ZERO
    lo, hi = min(coeffs), max(coeffs)
    return FieldElement.from_laurent(lo, [coeffs.get(k, 0) for k in range(lo, hi + 1)])


def valuation(a: FieldElement):
    return a.valuation


def compare(a, b) -> int:
    """-1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``."""
    return (FieldElement._coerce(a) - b).sign()


def abs_(a: FieldElement) -> FieldElement:
    return abs(a)


def is_topologically_nilpotent(a: FieldElement) -> bool:
    return a.valuation >= 1


def expand(a: FieldElement, precision: int) -> Expansion:
    if not a.num:
        return Expansion(precision, (), precision)
    if precision <= a.shift:
        raise ValueError(f"precision {precision} must exceed valuation {a.shift}")
    count = precision - a.shift
    coeffs = _series_div(a.num, a.den, count)
    return Expansion(a.shift, tuple(coeffs), precision)
