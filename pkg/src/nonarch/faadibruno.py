"""Set partitions and the Faa di Bruno formula.

    D^n (f o g)(x) = sum over partitions p of {1..n} of f^(|p|)(g(x)) * prod_{B in p} g^(|B|)(x)
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .field import FieldElement
from .power import PowerSeries, evaluate, formal_derivative
from .series import ApproxElement, Converges
from .catalog import blowup_pair

__all__ = [
    "MAX_N",
    "SetPartition",
    "set_partitions",
    "bell",
    "partition_terms",
    "faa_di_bruno",
    "composite_derivatives",
    "BlowupRow",
    "blowup_example",
]

MAX_N = 12


@dataclass(frozen=True)
class SetPartition:
    """Blocks of {1..n}, each sorted, ordered by smallest element."""

    blocks: tuple

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def block_sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)

    def is_singletons(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def __str__(self):
        return "|".join("".join(str(k) for k in b) if self.n < 10 else ",".join(map(str, b))
                        for b in self.blocks)


def _rgs(n: int):
    """Restricted growth strings of length n: s[0] = 0, s[k] <= 1 + max(s[:k])."""
    s = [0] * n

    def rec(k, top):
        if k == n:
            yield tuple(s)
            return
        for v in range(top + 2):
            s[k] = v
            yield from rec(k + 1, max(top, v))

    yield from rec(1, 0)


@lru_cache(maxsize=None)
def set_partitions(n: int) -> tuple:
    """All partitions of {1..n}, each exactly once (Bell(n) of them)."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in 1..{MAX_N}, got {n}")
    out = []
    for s in _rgs(n):
        blocks: list[list[int]] = [[] for _ in range(max(s) + 1)]
        for k, b in enumerate(s, start=1):
            blocks[b].append(k)
        out.append(SetPartition(tuple(tuple(b) for b in blocks)))
    return tuple(out)


def bell(n: int) -> int:
    """Bell numbers from the triangle recurrence."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def _check_data(f_derivs: Sequence, g_derivs: Sequence, n: int) -> None:
    if len(f_derivs) <= n:
        raise ValueError(f"need f derivatives up to order {n}, got {len(f_derivs) - 1}")
    if len(g_derivs) <= n:
        raise ValueError(f"need g derivatives up to order {n}, got {len(g_derivs) - 1}")


def partition_terms(f_derivs: Sequence, g_derivs: Sequence, n: int) -> list:
    """(partition, term) pairs of the formula; entries may be exact or ApproxElement."""
    _check_data(f_derivs, g_derivs, n)
    cache: dict = {}
    out = []
    for p in set_partitions(n):
        sizes = tuple(sorted(p.block_sizes()))
        if sizes not in cache:
            cache[sizes] = _profile_term(f_derivs, g_derivs, sizes)
        out.append((p, cache[sizes]))
    return out


def _profile_term(f_derivs: Sequence, g_derivs: Sequence, sizes: tuple):
    term = f_derivs[len(sizes)]
    for size in sizes:
        term = term * g_derivs[size]
    return term


def faa_di_bruno(f_derivs: Sequence, g_derivs: Sequence, n: int):
    """n-th derivative of f o g from f^(m)(g(x)) and g^(h)(x), m, h <= n.

    Partitions with the same block sizes give equal terms, so each size
    profile is evaluated once and weighted by its number of partitions.
    """
    _check_data(f_derivs, g_derivs, n)
    profiles = Counter(tuple(sorted(p.block_sizes())) for p in set_partitions(n))
    total = None
    for sizes, count in sorted(profiles.items()):
        term = _profile_term(f_derivs, g_derivs, sizes) * count
        total = term if total is None else total + term
    return total


def composite_derivatives(T: PowerSeries, S: PowerSeries, nmax: int, precision: int) -> tuple:
    """Derivatives of T at S(0) (certified sums) and of S at 0, orders 0..nmax."""
    a0 = S.coeff(0)
    f = []
    for m in range(nmax + 1):
        v = evaluate(formal_derivative(T, m), a0, precision)
        if not isinstance(v, Converges):
            raise ValueError(f"T^({m}) does not converge at S(0) = {a0}: {v.describe()}")
        f.append(v.sum)
    g = [S.coeff(h) * math.factorial(h) for h in range(nmax + 1)]
    return f, g


@dataclass(frozen=True)
class BlowupRow:
    n: int
    value: ApproxElement
    valuation: Optional[int]
    singletons_valuation: Optional[int]
    others_valuation: Optional[float]   # least valuation among the other partition terms
    strictly_dominant: bool


def _val(a) -> Optional[float]:
    # exact elements and ApproxElement both expose .valuation (None when undetermined)
    return a.valuation


def blowup_example(nmax: int = 8, precision: int = 32, a2: Optional[FieldElement] = None) -> list:
    """Valuations of D^n (T o S)(0), n = 1..nmax, for T = sum X^n and the blow-up S.

    T's derivatives at S(0) = e are certified infinite sums.  Each row also
    reports whether the all-singletons partition term has strictly smaller
    valuation than every other term.
    """
    if not 1 <= nmax <= 8:
        raise ValueError("nmax must be in 1..8")
    T, S = blowup_pair(a2)
    f, g = composite_derivatives(T, S, nmax, precision)
    rows = []
    for n in range(1, nmax + 1):
        terms = partition_terms(f, g, n)
        total = faa_di_bruno(f, g, n)
        single = [t for p, t in terms if p.is_singletons()][0]
        others = [_val(t) for p, t in terms if not p.is_singletons()]
        others_min = min(others) if others else None
        sv = _val(single)
        strict = sv is not None and (others_min is None or
                                     all(o is not None and sv < o for o in others))
        rows.append(BlowupRow(n, total, _val(total), sv, others_min, strict))
    return rows

