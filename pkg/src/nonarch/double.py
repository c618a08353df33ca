"""Double series over N^2: linearization, iterated sums, exhaustions and partitions.

Every certified computation here reduces to one fact: if ``joint_bound(n)``
bounds the valuation of all entries with ``i + j >= n``, then any finite set
containing the triangle ``{i + j < n}`` leaves a remainder of valuation at
least ``joint_bound(n)``.  Pairings, chains and partitions are therefore all
described by how quickly they exhaust those triangles.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

from .field import ZERO, FieldElement, epsilon
from .series import (
    DEFAULT_WINDOW,
    ApproxElement,
    Converges,
    TermStream,
    Verdict,
    first_reaching,
    judge_window,
    sum_series,
)

__all__ = [
    "DoubleArray",
    "Pairing",
    "GoursatChain",
    "PartitionOfGrid",
    "HypothesisFailure",
    "ChainError",
    "PartitionError",
    "cantor",
    "boustrophedon",
    "squares_chain",
    "triangles_chain",
    "chain_from_pairing",
    "rows_partition",
    "columns_partition",
    "antidiagonal_partition",
    "parity_partition",
    "random_partition",
    "random_finite_partition",
    "linearize",
    "linear_sum",
    "row_sum",
    "column_sum",
    "fubini_sum",
    "converse_criterion",
    "goursat_sum",
    "partition_sum",
    "restricted_sum",
    "product_series",
    "build_counterexample",
    "counterexample_weights",
]


class HypothesisFailure(Exception):
    """A theorem hypothesis could not be established; ``hypothesis`` names it."""

    def __init__(self, hypothesis: str, message: str, verdict: Optional[Verdict] = None, index=None):
        super().__init__(f"hypothesis {hypothesis!r} failed: {message}")
        self.hypothesis = hypothesis
        self.verdict = verdict
        self.index = index


class ChainError(ValueError):
    pass


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class DoubleArray:
    """Entries a(i, j).

    ``joint_bound(n)`` bounds valuation(a(i, j)) from below whenever i + j >= n.
    ``row_bound(i, n)`` / ``col_bound(j, n)`` are optional per-row / per-column
    certificates (valuation of a(i, j) for j >= n, resp. of a(i, j) for i >= n),
    for arrays whose rows converge without the whole array converging.
    """

    entry: Callable[[int, int], FieldElement]
    joint_bound: Optional[Callable[[int], float]] = None
    row_bound: Optional[Callable[[int, int], float]] = None
    col_bound: Optional[Callable[[int, int], float]] = None

    def __call__(self, i: int, j: int) -> FieldElement:
        return self.entry(i, j)

    def masked(self, member: Callable[[int, int], bool]) -> "DoubleArray":
        entry = self.entry
        return DoubleArray(lambda i, j: entry(i, j) if member(i, j) else ZERO,
                           self.joint_bound, self.row_bound, self.col_bound)

    def transpose(self) -> "DoubleArray":
        entry = self.entry
        return DoubleArray(lambda i, j: entry(j, i), self.joint_bound, self.col_bound, self.row_bound)

    def horizon(self, precision: float) -> Optional[int]:
        """Least n with joint_bound(n) >= precision."""
        if self.joint_bound is None:
            return None
        return first_reaching(self.joint_bound, precision)


@dataclass(frozen=True)
class Pairing:
    """Bijection N -> N^2 with its inverse.

    ``exhaustion(k)`` is the largest n such that every (i, j) with i + j < n is
    among ``to_pair(0) .. to_pair(k - 1)``.
    """

    to_pair: Callable[[int], tuple]
    from_pair: Callable[[int, int], int]
    exhaustion: Callable[[int], int]
    name: str = "pairing"

    def check(self, window: int = DEFAULT_WINDOW) -> None:
        for k in range(window):
            i, j = self.to_pair(k)
            if self.from_pair(i, j) != k:
                raise ValueError(f"{self.name}: from_pair(to_pair({k})) != {k}")
        for d in range(int(math.isqrt(2 * window))):
            for i in range(d + 1):
                if self.to_pair(self.from_pair(i, d - i)) != (i, d - i):
                    raise ValueError(f"{self.name}: to_pair(from_pair{(i, d - i)}) mismatch")


def _triangle_count(n: int) -> int:
    return n * (n + 1) // 2


def _diagonal_exhaustion(k: int) -> int:
    # largest n with n(n+1)/2 <= k
    n = (math.isqrt(8 * k + 1) - 1) // 2
    return n


def _cantor_to(k: int) -> tuple:
    d = _diagonal_exhaustion(k)
    j = k - _triangle_count(d)
    return (d - j, j)


def _cantor_from(i: int, j: int) -> int:
    return _triangle_count(i + j) + j


def _bous_to(k: int) -> tuple:
    d = _diagonal_exhaustion(k)
    t = k - _triangle_count(d)
    return (d - t, t) if d % 2 == 0 else (t, d - t)


def _bous_from(i: int, j: int) -> int:
    d = i + j
    return _triangle_count(d) + (j if d % 2 == 0 else i)


def cantor() -> Pairing:
    """Diagonal enumeration (0,0), (1,0), (0,1), (2,0), ..."""
    return Pairing(_cantor_to, _cantor_from, _diagonal_exhaustion, "cantor")


def boustrophedon() -> Pairing:
    """Diagonals traversed in alternating directions."""
    return Pairing(_bous_to, _bous_from, _diagonal_exhaustion, "boustrophedon")


@dataclass(frozen=True)
class GoursatChain:
    """Increasing finite subsets I_0 ⊂ I_1 ⊂ ... exhausting N^2.

    ``exhaustion(n)`` is a certified lower bound on min(i + j) over pairs not in I_n.
    """

    subset: Callable[[int], frozenset]
    exhaustion: Callable[[int], int]
    name: str = "chain"

    def check(self, window: int = 16) -> None:
        prev = frozenset()
        for n in range(window):
            cur = self.subset(n)
            if not prev <= cur:
                raise ChainError(f"{self.name}: I_{n - 1} is not contained in I_{n}")
            g = self.exhaustion(n)
            for d in range(g):
                for i in range(d + 1):
                    if (i, d - i) not in cur:
                        raise ChainError(f"{self.name}: {(i, d - i)} missing from I_{n}")
            prev = cur
        if self.exhaustion(window - 1) <= self.exhaustion(0) and window > 1:
            raise ChainError(f"{self.name}: chain does not grow within the sampled window")


def squares_chain() -> GoursatChain:
    return GoursatChain(
        lambda n: frozenset((i, j) for i in range(n + 1) for j in range(n + 1)),
        lambda n: n + 1, "squares")


def triangles_chain() -> GoursatChain:
    return GoursatChain(
        lambda n: frozenset((i, d - i) for d in range(n + 1) for i in range(d + 1)),
        lambda n: n + 1, "triangles")


def chain_from_pairing(p: Pairing) -> GoursatChain:
    """I_k = first k + 1 pairs; its sums S_k are exactly the linearized partial sums."""
    return GoursatChain(lambda k: frozenset(p.to_pair(m) for m in range(k + 1)),
                        lambda k: p.exhaustion(k + 1), "pairing-" + p.name)


@dataclass(frozen=True)
class PartitionOfGrid:
    """Partition of N^2 into parts J_0, J_1, ...

    ``part_of(i, j)`` names the part containing (i, j); ``enumerate_part(r, m)``
    is the m-th element of J_r in a fixed order, or None past the end of a
    finite part.
    """

    part_of: Callable[[int, int], int]
    enumerate_part: Callable[[int, int], Optional[tuple]]
    name: str = "partition"

    def check(self, depth: int = 12) -> None:
        """Consistency of membership and enumeration on the triangle i + j < depth."""
        region = [(i, d - i) for d in range(depth) for i in range(d + 1)]
        by_part: dict[int, set] = {}
        for ij in region:
            by_part.setdefault(self.part_of(*ij), set()).add(ij)
        for r, members in by_part.items():
            seen = set()
            m = 0
            budget = 4 * len(region) + 64
            while members - seen and m < budget:
                ij = self.enumerate_part(r, m)
                if ij is None:
                    break
                if ij in seen:
                    raise PartitionError(f"{self.name}: {ij} enumerated twice in part {r}")
                if self.part_of(*ij) != r:
                    raise PartitionError(f"{self.name}: {ij} enumerated in part {r} but belongs to "
                                         f"{self.part_of(*ij)}")
                seen.add(ij)
                m += 1
            if members - seen:
                raise PartitionError(f"{self.name}: part {r} never enumerates {sorted(members - seen)[0]}")


def rows_partition() -> PartitionOfGrid:
    return PartitionOfGrid(lambda i, j: i, lambda r, m: (r, m), "rows")


def columns_partition() -> PartitionOfGrid:
    return PartitionOfGrid(lambda i, j: j, lambda r, m: (m, r), "columns")


def antidiagonal_partition() -> PartitionOfGrid:
    return PartitionOfGrid(lambda i, j: i + j, lambda r, m: (m, r - m) if m <= r else None,
                           "antidiagonals")


def _filtered_enumeration(part_of: Callable[[int, int], int]):
    """m-th pair of part r in Cantor order (infinite parts only)."""
    cache: dict[int, list] = {}
    cursor: dict[int, int] = {}

    def enum(r: int, m: int):
        found = cache.setdefault(r, [])
        k = cursor.get(r, 0)
        while len(found) <= m:
            ij = _cantor_to(k)
            k += 1
            if part_of(*ij) == r:
                found.append(ij)
        cursor[r] = k
        return found[m]

    return enum


def parity_partition() -> PartitionOfGrid:
    """Two infinite parts: i + j even, i + j odd."""
    part = lambda i, j: (i + j) % 2  # noqa: E731
    return PartitionOfGrid(part, _filtered_enumeration(part), "parity")


def random_partition(seed: int, parts: int = 3) -> PartitionOfGrid:
    """Finitely many parts, each pair assigned at random (deterministic in ``seed``)."""

    @lru_cache(maxsize=None)
    def part(i, j):
        return random.Random(f"{seed}:{i}:{j}").randrange(parts)

    # each part is infinite with overwhelming probability; fall back on a diagonal
    # guarantee so enumeration never stalls: (0, d) goes to part d % parts
    def part_of(i, j):
        if i == 0:
            return j % parts
        return part(i, j)

    return PartitionOfGrid(part_of, _filtered_enumeration(part_of), f"random{parts}-{seed}")


def random_finite_partition(seed: int) -> PartitionOfGrid:
    """Countably many finite parts: each antidiagonal split at a random cut."""

    @lru_cache(maxsize=None)
    def cut(d):
        return random.Random(f"{seed}:cut:{d}").randrange(d + 2)

    def part_of(i, j):
        d = i + j
        return 2 * d + (0 if i < cut(d) else 1)

    def enum(r, m):
        d, side = divmod(r, 2)
        c = cut(d)
        lo, hi = (0, c) if side == 0 else (c, d + 1)
        i = lo + m
        return (i, d - i) if i < hi else None

    return PartitionOfGrid(part_of, enum, f"randomcut-{seed}")


# -- sums -------------------------------------------------------------------

def linearize(d: DoubleArray, p: Pairing) -> TermStream:
    tail = None
    if d.joint_bound is not None:
        jb, g = d.joint_bound, p.exhaustion
        tail = lambda k: jb(g(k))  # noqa: E731
    to_pair, entry = p.to_pair, d.entry
    return TermStream(lambda k: entry(*to_pair(k)), tail)


def linear_sum(d: DoubleArray, precision: int, pairing: Optional[Pairing] = None,
               window: int = DEFAULT_WINDOW) -> Verdict:
    return sum_series(linearize(d, pairing or cantor()), precision, window)


def _row_stream(d: DoubleArray, i: int) -> TermStream:
    tail = None
    if d.row_bound is not None:
        rb = d.row_bound
        tail = lambda n: rb(i, n)  # noqa: E731
    elif d.joint_bound is not None:
        jb = d.joint_bound
        tail = lambda n: jb(i + n)  # noqa: E731
    entry = d.entry
    return TermStream(lambda j: entry(i, j), tail)


def row_sum(d: DoubleArray, i: int, precision: int, window: int = DEFAULT_WINDOW) -> Verdict:
    return sum_series(_row_stream(d, i), precision, window)


def column_sum(d: DoubleArray, j: int, precision: int, window: int = DEFAULT_WINDOW) -> Verdict:
    return row_sum(d.transpose(), j, precision, window)


def _require(verdict: Verdict, hypothesis: str, what: str, index=None) -> ApproxElement:
    if not isinstance(verdict, Converges):
        raise HypothesisFailure(hypothesis, f"{what}: {verdict.describe()}", verdict, index)
    return verdict.sum


def _outer_sum(inner: Callable[[int], ApproxElement], outer_bound: Callable[[int], float],
               precision: int, hypothesis: str) -> ApproxElement:
    n0 = first_reaching(outer_bound, precision)
    if n0 is None:
        raise HypothesisFailure(hypothesis, "outer series certificate never reaches the precision")
    total = ApproxElement(ZERO, outer_bound(n0))
    for r in range(n0):
        total = total + inner(r)
    return total


def iterated_row_sum(d: DoubleArray, precision: int, window: int = DEFAULT_WINDOW) -> ApproxElement:
    """sum_i (sum_j a_ij) modulo e^precision (needs a joint bound)."""
    if d.joint_bound is None:
        raise HypothesisFailure("joint-bound", "array carries no joint valuation bound")
    jb = d.joint_bound
    return _outer_sum(
        lambda i: _require(row_sum(d, i, precision, window), "rows", f"row {i}", i),
        lambda n: min(jb(n), precision),
        precision, "rows")


def fubini_sum(d: DoubleArray, precision: int, window: int = DEFAULT_WINDOW,
               pairing: Optional[Pairing] = None) -> tuple:
    """(linearized sum, row-iterated sum, column-iterated sum), each modulo e^precision."""
    if d.joint_bound is None:
        raise HypothesisFailure("joint-bound", "array carries no joint valuation bound")
    lin = _require(linear_sum(d, precision, pairing, window), "double-series", "linearized series")
    rows = iterated_row_sum(d, precision, window)
    cols = iterated_row_sum(d.transpose(), precision, window)
    return lin, rows, cols


def converse_criterion(d: DoubleArray, precision: int, window: int = DEFAULT_WINDOW) -> Verdict:
    """Converse Fubini check.

    Hypothesis "rows": every row series converges (all sampled rows).
    Hypothesis "iterated-abs": the series of row sums of absolute values converges.
    On success the double series converges to the row-iterated sum.
    """
    abs_rows: dict[int, ApproxElement] = {}

    def abs_row(i: int) -> ApproxElement:
        if i not in abs_rows:
            s = _row_stream(d, i)
            _require(sum_series(s, precision, window), "rows", f"row {i}", i)
            abs_rows[i] = _require(sum_series(s.map(abs), precision, window), "rows",
                                   f"absolute row {i}", i)
        return abs_rows[i]

    for i in range(window):
        abs_row(i)

    outer_bound = None
    if d.joint_bound is not None:
        jb = d.joint_bound
        outer_bound = lambda n: min(jb(n), precision)  # noqa: E731
    if outer_bound is not None:
        n0 = first_reaching(outer_bound, precision)
        if n0 is not None:
            for i in range(n0):
                abs_row(i)
            value = iterated_row_sum(d, precision, window)
            return Converges(value, n0, certificate="converse-fubini")
    # no certificate for the outer series: look for a witness among the row heads
    profile = []
    for i in range(window):
        a = abs_rows[i]
        v = a.valuation
        profile.append(v if v is not None else a.tail_valuation)
    verdict = judge_window(profile)
    raise HypothesisFailure("iterated-abs", f"sum_i sum_j |a_ij|: {verdict.describe()}", verdict)


def goursat_sum(d: DoubleArray, chain: GoursatChain, precision: int,
                window: int = 16) -> ApproxElement:
    """lim S_k with S_k the sum over I_k, modulo e^precision."""
    chain.check(window)
    if d.joint_bound is None:
        raise HypothesisFailure("joint-bound", "array carries no joint valuation bound")
    jb, g = d.joint_bound, chain.exhaustion
    k = first_reaching(lambda n: jb(g(n)), precision)
    if k is None:
        raise ChainError(f"{chain.name}: exhaustion never reaches precision {precision}")
    total = ZERO
    for i, j in sorted(chain.subset(k)):
        total = total + d.entry(i, j)
    return ApproxElement(total, jb(g(k)))


def partition_sum(d: DoubleArray, parts: PartitionOfGrid, precision: int,
                  check_depth: int = 12) -> ApproxElement:
    """sum_r (sum over J_r), each part summed in its own enumeration order.

    Only entries with i + j < D matter, where D is the horizon of the joint
    bound at ``precision``; parts and positions inside parts are cut off by
    scanning membership on that triangle.
    """
    parts.check(check_depth)
    D = d.horizon(precision)
    if D is None:
        raise HypothesisFailure("joint-bound", "array carries no certified joint bound")
    jb = d.joint_bound
    region = [(i, s - i) for s in range(D) for i in range(s + 1)]
    members: dict[int, set] = {}
    for ij in region:
        members.setdefault(parts.part_of(*ij), set()).add(ij)

    total = ApproxElement(ZERO, jb(D))
    # parts with no element below the horizon contribute valuation >= jb(D)
    for r in sorted(members):
        need = set(members[r])
        inner = ZERO
        m = 0
        while need:
            ij = parts.enumerate_part(r, m)
            if ij is None:
                raise PartitionError(f"{parts.name}: part {r} ended before covering {sorted(need)[0]}")
            inner = inner + d.entry(*ij)
            need.discard(ij)
            m += 1
        # remaining elements of J_r all satisfy i + j >= D
        total = total + ApproxElement(inner, jb(D))
    return total


def restricted_sum(d: DoubleArray, member: Callable[[int, int], bool], precision: int,
                   window: int = DEFAULT_WINDOW) -> ApproxElement:
    """Sum of the array masked to J = {(i, j) : member(i, j)}."""
    return _require(linear_sum(d.masked(member), precision, None, window), "double-series",
                    "restricted series")


def _pair_bound(tb: Callable[[int], float], tc: Callable[[int], float]) -> Callable[[int], float]:
    # v(b_i c_j) >= tb(i) + tc(j); both non-decreasing, so the minimum over
    # i + j >= n is attained on i + j = n
    @lru_cache(maxsize=None)
    def jb(n):
        return min(tb(i) + tc(n - i) for i in range(n + 1))

    return jb


def product_array(b: TermStream, c: TermStream) -> DoubleArray:
    if b.tail_bound is None or c.tail_bound is None:
        raise HypothesisFailure("factors", "both factor series need tail bounds")
    bt, ct = b.term, c.term
    return DoubleArray(lambda i, j: bt(i) * ct(j), _pair_bound(b.tail_bound, c.tail_bound))


def product_series(b: TermStream, c: TermStream, precision: int,
                   window: int = DEFAULT_WINDOW) -> ApproxElement:
    """Sum of the double series b_i c_j modulo e^precision."""
    _require(sum_series(b, precision, window), "factors", "first factor")
    _require(sum_series(c, precision, window), "factors", "second factor")
    return _require(linear_sum(product_array(b, c), precision, None, window), "double-series",
                    "product double series")


# -- the counterexample ------------------------------------------------------

def counterexample_weights() -> TermStream:
    """k_0 = (1 - 2e)/(1 - e), k_i = e^i: positive terms summing to 1."""
    eps = epsilon()
    k0 = (1 - 2 * eps) / (1 - eps)

    def k(i):
        return k0 if i == 0 else eps ** i

    return TermStream(k, lambda n: n)


def build_counterexample() -> DoubleArray:
    """a_i0 = 1 - k_0, a_ij = -k_j (j >= 1): rows sum to 0, column 0 diverges."""
    k = counterexample_weights()
    first = 1 - k.term(0)

    def entry(i, j):
        return first if j == 0 else -k.term(j)

    def row_bound(i, n):
        # a_i0 = e/(1 - e) has valuation 1, a_ij = -e^j
        return max(n, 1)

    return DoubleArray(entry, None, row_bound, None)

