"""Simple series over Q((e)): partial sums, certified sums, splitting and reordering.

A series converges iff its terms tend to 0, i.e. iff the term valuations tend
to +infinity.  No finite sample can establish that, so ``sum`` only reports
convergence when the stream carries a ``tail_bound`` certificate; without one
it can at best exhibit a divergence witness.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .field import VAL_INF, ZERO, FieldElement, fsum

__all__ = [
    "DEFAULT_WINDOW",
    "MAX_TERMS",
    "TermStream",
    "ApproxElement",
    "Verdict",
    "Converges",
    "Diverges",
    "Unknown",
    "BijectionError",
    "DominationError",
    "partial_sum",
    "sum_series",
    "judge_window",
    "split_pm",
    "reorder",
    "group_pairs",
    "dominated_convergence_check",
    "first_reaching",
]

DEFAULT_WINDOW = 64
MAX_TERMS = 1 << 20


@dataclass(frozen=True)
class TermStream:
    """Terms ``term(n)`` for n = 0, 1, ...

    ``tail_bound(n)``, when given, is a certified lower bound on the valuation
    of every ``term(m)`` with ``m >= n``; it must be non-decreasing.
    """

    term: Callable[[int], FieldElement]
    tail_bound: Optional[Callable[[int], float]] = None

    def __getitem__(self, n: int) -> FieldElement:
        return self.term(n)

    @classmethod
    def zero(cls) -> "TermStream":
        return cls(lambda n: ZERO, lambda n: VAL_INF)

    @classmethod
    def finite(cls, terms: Sequence[FieldElement]) -> "TermStream":
        terms = tuple(terms)

        def term(n):
            return terms[n] if n < len(terms) else ZERO

        def bound(n):
            vals = [t.valuation for t in terms[n:]]
            return min(vals) if vals else VAL_INF

        return cls(term, bound)

    def map(self, fn: Callable[[FieldElement], FieldElement], keeps_bound: bool = True) -> "TermStream":
        return TermStream(lambda n: fn(self.term(n)), self.tail_bound if keeps_bound else None)

    def cached(self) -> "TermStream":
        """Same stream with memoized terms (safe for concurrent readers)."""
        cache: dict[int, FieldElement] = {}
        lock = threading.Lock()
        raw = self.term

        def term(n):
            try:
                return cache[n]
            except KeyError:
                pass
            value = raw(n)
            with lock:
                cache.setdefault(n, value)
            return value

        return TermStream(term, self.tail_bound)


@dataclass(frozen=True)
class ApproxElement:
    """A field value known up to e^tail_valuation: ``true - head`` has valuation >= tail_valuation."""

    head: FieldElement
    tail_valuation: float

    @property
    def exact(self) -> bool:
        return self.tail_valuation == VAL_INF

    @property
    def valuation(self):
        """Exact valuation when determined, otherwise None."""
        v = self.head.valuation
        return v if v < self.tail_valuation else None

    @property
    def valuation_lower_bound(self):
        return min(self.head.valuation, self.tail_valuation)

    def agrees(self, other, precision: float) -> bool:
        """Whether two values are certified equal modulo e^precision."""
        if isinstance(other, ApproxElement):
            if min(self.tail_valuation, other.tail_valuation) < precision:
                return False
            return (self.head - other.head).valuation >= precision
        if self.tail_valuation < precision:
            return False
        return (self.head - other).valuation >= precision

    def disagrees(self, other) -> bool:
        """Whether the two values are certainly different."""
        if isinstance(other, ApproxElement):
            cap = min(self.tail_valuation, other.tail_valuation)
            other = other.head
        else:
            cap = self.tail_valuation
        return (self.head - other).valuation < cap

    def truncated(self) -> FieldElement:
        """Laurent polynomial part of the head below the certified precision."""
        if self.exact:
            return self.head
        return self.head.truncate(int(self.tail_valuation))

    def __add__(self, other) -> "ApproxElement":
        if not isinstance(other, ApproxElement):
            other = ApproxElement.of(FieldElement(other))
        return ApproxElement(self.head + other.head, min(self.tail_valuation, other.tail_valuation))

    def __neg__(self):
        return ApproxElement(-self.head, self.tail_valuation)

    __radd__ = __add__

    def __sub__(self, other) -> "ApproxElement":
        return self + (-other)

    def __rsub__(self, other) -> "ApproxElement":
        return (-self) + other

    def __mul__(self, other) -> "ApproxElement":
        if not isinstance(other, ApproxElement):
            other = ApproxElement.of(FieldElement(other))
        # (h1 + t1)(h2 + t2) - h1 h2 = h1 t2 + h2 t1 + t1 t2
        va, vb = self.head.valuation, other.head.valuation
        ta, tb = self.tail_valuation, other.tail_valuation
        tail = min(va + tb, vb + ta, ta + tb)
        head = self.head * other.head
        if tail != VAL_INF:
            head = head.truncate(math.ceil(tail))
        return ApproxElement(head, tail)

    __rmul__ = __mul__

    def __str__(self):
        if self.exact:
            return str(self.head)
        return f"{self.truncated()} + O(e^{self.tail_valuation})"

    @classmethod
    def of(cls, value: FieldElement) -> "ApproxElement":
        return cls(value, VAL_INF)


class Verdict:
    """Outcome of a convergence question."""

    kind = "verdict"

    @property
    def converges(self) -> bool:
        return isinstance(self, Converges)


@dataclass(frozen=True)
class Converges(Verdict):
    sum: ApproxElement
    terms_used: int = 0
    certificate: object = None
    kind = "converges"

    def describe(self) -> str:
        return f"converges, tail valuation >= {self.sum.tail_valuation} after {self.terms_used} terms"


@dataclass(frozen=True)
class Diverges(Verdict):
    """Terms from index ``start`` on keep returning to valuation <= ``floor``."""

    start: int
    floor: int
    hits: int
    profile: tuple = field(default=(), repr=False)
    kind = "diverges"

    def describe(self) -> str:
        return (f"diverges: {self.hits} terms at index >= {self.start} have valuation <= "
                f"{self.floor}")


@dataclass(frozen=True)
class Unknown(Verdict):
    profile: tuple = field(default=(), repr=False)
    kind = "unknown"

    def describe(self) -> str:
        return "unknown: no certificate and no divergence witness in the sampled window"


class BijectionError(ValueError):
    pass


class DominationError(ValueError):
    def __init__(self, index: int):
        super().__init__(f"domination |b_n| <= |a_n| fails at n = {index}")
        self.index = index


def partial_sum(s: TermStream, N: int) -> FieldElement:
    """Exact sum of term(0) .. term(N)."""
    return fsum(s.term(n) for n in range(N + 1))


def first_reaching(bound: Callable[[int], float], target: float, limit: int = MAX_TERMS) -> Optional[int]:
    """Least n with bound(n) >= target, for a non-decreasing bound; None past ``limit``."""
    if bound(0) >= target:
        return 0
    hi = 1
    while bound(hi) < target:
        hi *= 2
        if hi > limit:
            return None
    lo = hi // 2  # bound(lo) < target <= bound(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def judge_window(valuations: Sequence[float]) -> Verdict:
    """Divergence witness from a sampled valuation profile, else Unknown.

    The witness floor is the largest finite valuation seen in the first half of
    the window; divergence is reported when at least a quarter of the second
    half still sits at or below that floor.
    """
    profile = tuple(valuations)
    w = len(profile)
    half = w // 2
    first = [v for v in profile[:half] if v != VAL_INF]
    second = profile[half:]
    if not first or not second:
        return Unknown(profile)
    floor = max(first)
    hits = sum(1 for v in second if v <= floor)
    if hits >= max(1, len(second) // 4):
        return Diverges(half, int(floor), hits, profile)
    return Unknown(profile)


def sum_series(s: TermStream, precision: int, window: int = DEFAULT_WINDOW) -> Verdict:
    """Sum of the series modulo e^precision, or a divergence witness."""
    if s.tail_bound is not None:
        n0 = first_reaching(s.tail_bound, precision)
        if n0 is not None:
            head = partial_sum(s, n0 - 1)
            return Converges(ApproxElement(head, s.tail_bound(n0)), n0)
    return judge_window([s.term(n).valuation for n in range(window)])


def split_pm(s: TermStream) -> tuple[TermStream, TermStream]:
    """Non-negative streams (|c|+c)/2 and (|c|-c)/2 with c = plus - minus."""

    def plus(n):
        c = s.term(n)
        return c if c.sign() > 0 else ZERO

    def minus(n):
        c = s.term(n)
        return -c if c.sign() < 0 else ZERO

    return TermStream(plus, s.tail_bound), TermStream(minus, s.tail_bound)


class _Mex:
    """Smallest natural number missing from f(0..n-1), computed incrementally."""

    def __init__(self, f: Callable[[int], int]):
        self.f = f
        self.seen: set[int] = set()
        self.n = 0
        self.mex = 0
        self.history = [0]
        self.lock = threading.Lock()

    def __call__(self, n: int) -> int:
        with self.lock:
            while self.n < n:
                self.seen.add(self.f(self.n))
                self.n += 1
                while self.mex in self.seen:
                    self.mex += 1
                self.history.append(self.mex)
            return self.history[n]


def reorder(s: TermStream, forward: Callable[[int], int], inverse: Callable[[int], int],
            window: int = DEFAULT_WINDOW) -> TermStream:
    """Stream n -> term(forward(n)).

    Bijectivity is spot-checked on ``range(window)``.  The tail bound transports
    exactly: every m >= n has forward(m) >= mex(forward(0..n-1)) by injectivity.
    """
    for n in range(window):
        f, g = forward(n), inverse(n)
        if f < 0 or g < 0:
            raise BijectionError(f"forward/inverse leave the natural numbers at {n}")
        if inverse(f) != n or forward(g) != n:
            raise BijectionError(f"forward/inverse disagree at {n}")
    tail = None
    if s.tail_bound is not None:
        mex = _Mex(forward)
        base = s.tail_bound
        tail = lambda n: base(mex(n))  # noqa: E731
    return TermStream(lambda n: s.term(forward(n)), tail)


def group_pairs(s: TermStream) -> TermStream:
    """Associated series with terms c(2n) + c(2n+1)."""
    tail = None
    if s.tail_bound is not None:
        base = s.tail_bound
        tail = lambda n: base(2 * n)  # noqa: E731
    return TermStream(lambda n: s.term(2 * n) + s.term(2 * n + 1), tail)


def dominated_convergence_check(a: TermStream, b: TermStream, precision: int,
                                window: int = DEFAULT_WINDOW) -> Verdict:
    """Sum of ``b`` certified by ``a``'s tail bound, given |b_n| <= |a_n| on the window."""
    if a.tail_bound is None:
        raise ValueError("dominating stream carries no tail bound")
    for n in range(window):
        if abs(b.term(n)) > abs(a.term(n)):
            raise DominationError(n)
    return sum_series(TermStream(b.term, a.tail_bound), precision, window)


def block_reversal(block: int = 4):
    """Involution reversing each block [block*k, block*k + block - 1]."""

    def f(n):
        q, r = divmod(n, block)
        return q * block + (block - 1 - r)

    return f, f


def pair_swap():
    f = lambda n: n ^ 1  # noqa: E731
    return f, f


def identity():
    f = lambda n: n  # noqa: E731
    return f, f


def geometric(ratio: FieldElement) -> TermStream:
    """Stream ratio^n with the tail bound n * v(ratio) (for v(ratio) >= 0)."""
    v = ratio.valuation
    if v == VAL_INF:
        return TermStream(lambda n: ratio ** n if n == 0 else ZERO, lambda n: 0 if n == 0 else VAL_INF)
    if v < 0:
        return TermStream(lambda n: ratio ** n)
    return TermStream(lambda n: ratio ** n, lambda n: n * v)

