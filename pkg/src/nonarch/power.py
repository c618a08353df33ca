"""Power series over Q((e)): evaluation, products, powers and substitution.

Convergence certificates for power series come from affine valuation bounds
``v(a_j) >= slope * j + intercept``: at a point x the terms a_j x^j then have
valuation at least ``(slope + v(x)) * j + intercept``, which tends to infinity
exactly when ``slope + v(x) > 0``.

Values of infinite sums are returned as ``ApproxElement`` heads truncated below
the requested precision; intermediate truncations are sized so that every
discarded piece has valuation at least that precision.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional

from .double import DoubleArray, HypothesisFailure, iterated_row_sum
from .field import VAL_INF, ZERO, FieldElement, fdot, from_rational
from .series import (
    DEFAULT_WINDOW,
    ApproxElement,
    Converges,
    Unknown,
    Verdict,
    judge_window,
)

__all__ = [
    "AffineBound",
    "PowerSeries",
    "PowerTable",
    "ExpectedCoefficients",
    "SubstitutionCertificate",
    "evaluate",
    "partial_eval",
    "eval_at_approx",
    "cauchy_product",
    "power_table",
    "abs_series",
    "expected_coefficients",
    "substitution_criterion",
    "composite_eval",
    "neighborhood_radius",
    "formal_derivative",
    "sign_flip",
]


def _ceil_val(v):
    """Valuations are integers, so a rational lower bound may be rounded up."""
    return v if v in (VAL_INF, -VAL_INF) else math.ceil(v)


def _kmul(k, v):
    """k * v with the convention 0 * inf = 0."""
    return 0 if k == 0 else k * v


@dataclass(frozen=True)
class AffineBound:
    """v(a_j) >= slope * j + intercept for every j."""

    slope: Fraction
    intercept: Fraction

    def __call__(self, j: int) -> Fraction:
        return self.slope * j + self.intercept

    def horizon(self, shift, target) -> Optional[int]:
        """Least n with (slope + shift) * n + intercept >= target, if the rate is positive."""
        rate = self.slope + shift
        if rate <= 0:
            return None
        return max(0, math.ceil((target - self.intercept) / rate))


class PowerSeries:
    """Coefficients a_j with optional affine valuation bound and optional degree.

    ``degree`` marks a polynomial: a_j = 0 for j > degree.  Coefficients are
    memoized; the cache is shared between threads.
    """

    def __init__(self, coeff: Callable[[int], FieldElement], bound: Optional[AffineBound] = None,
                 degree: Optional[int] = None, name: str = ""):
        self._raw = coeff
        self.bound = bound
        self.degree = degree
        self.name = name
        self._coeff = lru_cache(maxsize=None)(self._compute)

    def _compute(self, j: int) -> FieldElement:
        if self.degree is not None and j > self.degree:
            return ZERO
        return self._raw(j)

    def coeff(self, j: int) -> FieldElement:
        return self._coeff(j)

    __getitem__ = coeff

    def __repr__(self):
        head = ", ".join(str(self.coeff(j)) for j in range(4))
        return f"PowerSeries({self.name or head + ', ...'})"

    @classmethod
    def polynomial(cls, coeffs, name: str = "") -> "PowerSeries":
        coeffs = tuple(c if isinstance(c, FieldElement) else from_rational(c) for c in coeffs)
        return cls(lambda j: coeffs[j] if j < len(coeffs) else ZERO, degree=max(len(coeffs) - 1, 0),
                   name=name)

    @classmethod
    def from_function(cls, f: Callable[[int], FieldElement], slope=0, intercept=0,
                      name: str = "") -> "PowerSeries":
        return cls(f, AffineBound(Fraction(slope), Fraction(intercept)), name=name)

    @classmethod
    def geometric(cls) -> "PowerSeries":
        one = from_rational(1)
        return cls(lambda j: one, AffineBound(Fraction(0), Fraction(0)), name="sum X^n")

    def affine(self) -> Optional[AffineBound]:
        """The declared bound, or an exact one derived for polynomials."""
        if self.bound is not None:
            return self.bound
        if self.degree is not None:
            vals = [self.coeff(j).valuation for j in range(self.degree + 1)]
            finite = [v for v in vals if v != VAL_INF]
            return AffineBound(Fraction(0), Fraction(min(finite) if finite else 0))
        return None


# -- evaluation ----------------------------------------------------------------

def _horizon(S: PowerSeries, vx, precision) -> Optional[int]:
    """Number of leading terms after which all terms of S at x vanish mod e^precision."""
    best = None
    if S.degree is not None:
        best = S.degree + 1
    if S.bound is not None:
        n = S.bound.horizon(vx, precision)
        if n is not None:
            best = n if best is None else min(best, n)
    return best


def _truncated_sum(S: PowerSeries, x: FieldElement, n: int, precision: int) -> FieldElement:
    """sum_{j < n} a_j x^j modulo e^precision, as a Laurent polynomial."""
    vx = x.valuation
    coeffs = [S.coeff(j) for j in range(n)]
    need = [precision - c.valuation if c else -VAL_INF for c in coeffs]
    # R[j]: precision to which x^j is carried, enough for every later term
    R = [0] * n
    run = -VAL_INF
    for j in range(n - 1, -1, -1):
        run = max(need[j], run - vx)
        R[j] = max(run, j * vx)
    total = ZERO
    if n == 0:
        return total
    rx = max((R[j] - (j - 1) * vx for j in range(1, n)), default=vx + 1)
    xt = x.truncate(int(math.ceil(rx))) if rx != VAL_INF else x
    power = from_rational(1)
    for j in range(n):
        if j:
            power = (power * xt).truncate(int(math.ceil(R[j])))
        c = coeffs[j]
        if not c:
            continue
        term = c.truncate(precision - j * vx) * power
        total = total + term.truncate(precision)
    return total


def evaluate(S: PowerSeries, x: FieldElement, precision: int, window: int = DEFAULT_WINDOW) -> Verdict:
    """S(x) modulo e^precision, or a divergence witness."""
    if x.is_zero():
        return Converges(ApproxElement.of(S.coeff(0)), 1)
    vx = x.valuation
    n0 = _horizon(S, vx, precision)
    if n0 is not None:
        if S.degree is not None and n0 == S.degree + 1:
            return Converges(ApproxElement.of(partial_eval(S, x, S.degree)), n0)
        return Converges(ApproxElement(_truncated_sum(S, x, n0, precision), precision), n0)
    return judge_window([S.coeff(j).valuation + _kmul(j, vx) for j in range(window)])


def partial_eval(S: PowerSeries, x: FieldElement, N: int) -> FieldElement:
    """Exact sum_{j <= N} a_j x^j."""
    total = ZERO
    power = from_rational(1)
    for j in range(N + 1):
        if j:
            power = power * x
        c = S.coeff(j)
        if c:
            total = total + c * power
    return total


def eval_at_approx(T: PowerSeries, k: ApproxElement, precision: int,
                   window: int = DEFAULT_WINDOW) -> Verdict:
    """T(k) for a point known only modulo e^t, with the induced loss of precision."""
    if k.exact:
        return evaluate(T, k.head, precision, window)
    h, t = k.head, k.tail_valuation
    v_low = min(h.valuation, t)
    v_exact = h.valuation if h.valuation < t else None
    aff = T.affine()
    certified = T.degree is not None or (aff is not None and aff.slope + v_low > 0)
    if not certified:
        if v_exact is None:
            return Unknown()
        return judge_window([T.coeff(i).valuation + _kmul(i, v_exact) for i in range(window)])
    # T(k) - T(h) = sum_i b_i (k^i - h^i), and v(k^i - h^i) >= t + (i - 1) v_low
    if T.degree is not None:
        loss = min((T.coeff(i).valuation + _kmul(i - 1, v_low) for i in range(1, T.degree + 1)),
                   default=VAL_INF)
    else:
        # min over i >= 1 of sT i + bT + (i - 1) v_low, attained at i = 1
        loss = aff.slope + aff.intercept
    inner = evaluate(T, h, precision, window)
    if not isinstance(inner, Converges):
        return inner
    tail = _ceil_val(min(inner.sum.tail_valuation, t + loss))
    return Converges(ApproxElement(inner.sum.head, tail), inner.terms_used)


# -- formal operations ----------------------------------------------------------

def cauchy_product(A: PowerSeries, B: PowerSeries) -> PowerSeries:
    def coeff(k):
        xs = [A.coeff(i) for i in range(k + 1)]
        return fdot(xs, (B.coeff(k - i) if a else ZERO for i, a in enumerate(xs)))

    bound = None
    if A.bound is not None and B.bound is not None:
        bound = AffineBound(min(A.bound.slope, B.bound.slope), A.bound.intercept + B.bound.intercept)
    degree = None
    if A.degree is not None and B.degree is not None:
        degree = A.degree + B.degree
    return PowerSeries(coeff, bound, degree)


def abs_series(S: PowerSeries) -> PowerSeries:
    return PowerSeries(lambda j: abs(S.coeff(j)), S.bound, S.degree)


def sign_flip(S: PowerSeries) -> PowerSeries:
    """Coefficients (-1)^j a_j, so that S(-x) is sign_flip(S)(x)."""
    return PowerSeries(lambda j: -S.coeff(j) if j % 2 else S.coeff(j), S.bound, S.degree)


def scaled(S: PowerSeries, x: FieldElement) -> PowerSeries:
    """Coefficients a_j x^j."""
    bound = None
    if S.bound is not None and not x.is_zero():
        bound = AffineBound(S.bound.slope + x.valuation, S.bound.intercept)
    return PowerSeries(lambda j: S.coeff(j) * x ** j, bound, S.degree)


def formal_derivative(S: PowerSeries, n: int) -> PowerSeries:
    """n-th derivative: coefficient j is (j+n)!/j! * a_{j+n}."""
    if n < 0:
        raise ValueError("derivative order must be non-negative")

    def coeff(j):
        c = S.coeff(j + n)
        if not c:
            return c
        return c * (math.factorial(j + n) // math.factorial(j))

    bound = None
    if S.bound is not None:
        bound = AffineBound(S.bound.slope, S.bound.intercept + S.bound.slope * n)
    degree = None
    if S.degree is not None:
        degree = max(S.degree - n, 0)
    return PowerSeries(coeff, bound, degree)


class PowerTable:
    """c[i][j] = coefficient of X^j in S(X)^i, built row by row from

        c[0] = (1, 0, 0, ...),   c[i+1][j] = sum_{m <= j} c[i][m] * a_{j-m}.

    With ``row_precision`` the entries of row i are kept modulo
    e^row_precision(i).  That is sound when every coefficient has valuation
    >= ``floor`` and row_precision(i) >= row_precision(i+1) - floor.
    """

    def __init__(self, S: PowerSeries, row_precision: Optional[Callable[[int], float]] = None,
                 floor=None):
        self.S = S
        self.row_precision = row_precision
        self.floor = floor
        self._rows: list[list[FieldElement]] = [[]]
        self._lock = threading.RLock()
        self._acache: dict = {}

    def _a(self, m: int, prec) -> FieldElement:
        a = self.S.coeff(m)
        if self.row_precision is None or prec == VAL_INF or not a:
            return a
        prec = int(math.ceil(prec))
        key = (m, prec)
        if key not in self._acache:
            self._acache[key] = a.truncate(prec)
        return self._acache[key]

    def _entry(self, i: int, j: int) -> FieldElement:
        if i == 0:
            return from_rational(1) if j == 0 else ZERO
        prev = self.row(i - 1, j)
        exact = self.row_precision is None
        Q = None if exact else self.row_precision(i)
        if not exact and self.row_precision(i - 1) < Q - self.floor:
            raise ValueError(f"row precision {self.row_precision(i - 1)} too low for row {i}")
        xs, ys = [], []
        for m in range(j + 1):
            c = prev[m]
            if not c:
                continue
            a = self._a(j - m, VAL_INF if exact else Q - c.valuation)
            if a:
                xs.append(c)
                ys.append(a)
        total = fdot(xs, ys)
        if not exact:
            total = total.truncate(int(math.ceil(Q)))
        return total

    def row(self, i: int, jmax: int) -> list:
        """Entries c[i][0..jmax]."""
        with self._lock:
            while len(self._rows) <= i:
                self._rows.append([])
            r = self._rows[i]
            while len(r) <= jmax:
                r.append(self._entry(i, len(r)))
            return r[: jmax + 1]

    def c(self, i: int, j: int) -> FieldElement:
        return self.row(i, j)[j]

    __call__ = c


def power_table(S: PowerSeries, imax: int, jmax: int) -> PowerTable:
    """Exact table with rows 0..imax filled to column jmax."""
    table = PowerTable(S)
    for i in range(imax + 1):
        table.row(i, jmax)
    return table


# -- expected coefficients ------------------------------------------------------

class ExpectedCoefficients:
    """d_j = sum_i b_i c_ij for T(S(X)), each returned as a verdict.

    With a_0 = 0 the sums stop at i = j and are exact.  Otherwise, given affine
    bounds, v(b_i c_ij) >= bT + (sT + v(a_0)) i + j (beta - v(a_0) + s), so every
    d_j is certified as soon as sT + v(a_0) > 0; without that the valuation
    profile of the terms is inspected for a divergence witness.
    """

    def __init__(self, T: PowerSeries, S: PowerSeries, jmax: int, precision: int,
                 window: int = DEFAULT_WINDOW):
        self.T, self.S, self.jmax, self.precision, self.window = T, S, jmax, precision, window
        self.a0 = S.coeff(0)
        self._cache: dict[int, Verdict] = {}
        self._exact = PowerTable(S)
        self._plan = self._certify()

    def _certify(self):
        if not self.a0:
            return None
        ta, sa = self.T.affine(), self.S.affine()
        if ta is None or sa is None:
            return None
        u0 = self.a0.valuation
        rate = ta.slope + u0
        if self.T.degree is None and rate <= 0:
            return None
        const = lambda j: ta.intercept + j * (sa.intercept - u0 + sa.slope)  # noqa: E731

        def count(j):
            if self.T.degree is not None:
                return self.T.degree + 1
            return max(0, math.ceil((self.precision - const(j)) / rate))

        imax = max(count(j) for j in range(self.jmax + 1))
        alpha = min(u0, sa.slope + sa.intercept) if sa.slope >= 0 else None
        table = self._exact
        if alpha is not None and imax > 0:
            P, bT, sT = self.precision, ta.intercept, ta.slope
            need = [P - bT - sT * i for i in range(imax)]
            Q = list(need)
            for i in range(imax - 2, -1, -1):
                Q[i] = max(need[i], Q[i + 1] - alpha)
            Q.append(Q[-1] - alpha)
            table = PowerTable(self.S, lambda i: Q[min(i, len(Q) - 1)] if i < len(Q) else Q[-1],
                               alpha)
        return count, table

    def d(self, j: int) -> Verdict:
        if not 0 <= j <= self.jmax:
            raise IndexError(f"expected coefficient index {j} outside 0..{self.jmax}")
        if j in self._cache:
            return self._cache[j]
        T, P = self.T, self.precision
        if not self.a0:
            total = ZERO
            for i in range(j + 1):
                b = T.coeff(i)
                if b:
                    total = total + b * self._exact.c(i, j)
            verdict = Converges(ApproxElement.of(total), j + 1, certificate="finite")
        elif self._plan is not None:
            count, table = self._plan
            n = count(j)
            total = ZERO
            for i in range(n):
                b = T.coeff(i)
                if b:
                    total = total + (b * table.c(i, j)).truncate(P)
            tail = VAL_INF if T.degree is not None else P
            verdict = Converges(ApproxElement(total, tail), n)
        else:
            vals = []
            for i in range(self.window):
                b = T.coeff(i)
                vals.append((b * self._exact.c(i, j)).valuation if b else VAL_INF)
            verdict = judge_window(vals)
        self._cache[j] = verdict
        return verdict

    __call__ = d
    __getitem__ = d

    def all_converge(self) -> bool:
        return all(self.d(j).converges for j in range(self.jmax + 1))


def expected_coefficients(T: PowerSeries, S: PowerSeries, jmax: int, precision: int,
                          window: int = DEFAULT_WINDOW) -> ExpectedCoefficients:
    return ExpectedCoefficients(T, S, jmax, precision, window)


# -- substitution ---------------------------------------------------------------

def _inner_profile(S: PowerSeries, x: FieldElement):
    """(u0, sigma, kappa1) with v(a_0) = u0 and v(a_m x^m) >= sigma (m - 1) + kappa1 for m >= 1."""
    u0 = S.coeff(0).valuation
    if x.is_zero():
        return u0, Fraction(1), VAL_INF
    vx = x.valuation
    if S.degree is not None:
        D = S.degree
        vals = {m: S.coeff(m).valuation + m * vx for m in range(1, D + 1)}
        vals = {m: v for m, v in vals.items() if v != VAL_INF}
        if not vals:
            return u0, Fraction(1), VAL_INF
        mu = min(vals.values())
        rates = [Fraction(v - mu, m - 1) for m, v in vals.items() if m >= 2]
        sigma = min([Fraction(1)] + rates)
        if sigma > 0:
            return u0, sigma, Fraction(mu)
        sigma = Fraction(1, 4 * D)
        return u0, sigma, min(v - sigma * (m - 1) for m, v in vals.items())
    if S.bound is not None:
        sigma = S.bound.slope + vx
        if sigma <= 0:
            return None
        return u0, sigma, sigma + S.bound.intercept
    return None


@dataclass(frozen=True)
class SubstitutionCertificate:
    k: ApproxElement           # S(x)
    k_bar: ApproxElement       # sum |a_j| |x|^j
    formal: ApproxElement      # sum_j d_j x^j
    composite: ApproxElement   # T(S(x))
    agree: bool


def _substitution_array(T: PowerSeries, S: PowerSeries, x: FieldElement, precision: int):
    """Array b_i c_ij x^j with a joint valuation bound capped at ``precision``."""
    prof = _inner_profile(S, x)
    ta = T.affine()
    if prof is None or ta is None:
        return None
    u0, sigma, k1 = prof
    sT, bT = ta.slope, ta.intercept
    kappa = min(u0, k1)
    tau = sT + kappa
    P = precision
    if T.degree is not None:
        imax = T.degree + 1
    elif tau > 0:
        imax = max(0, math.ceil((P - bT) / tau))
    else:
        return None

    def L(i, j):
        if T.degree is not None and i > T.degree:
            return VAL_INF
        if i == 0:
            return bT if j == 0 else VAL_INF
        if j == 0:
            return bT + sT * i + _kmul(i, u0)
        best = VAL_INF
        for r in range(1, min(i, j) + 1):
            v = _kmul(i - r, u0) + _kmul(r, k1) + sigma * (j - r)
            best = min(best, v)
        return bT + sT * i + best

    @lru_cache(maxsize=None)
    def jb(n):
        best = Fraction(P)
        for i in range(imax):
            lo = max(0, n - i)
            for j in range(lo, max(lo, i) + 1):
                best = min(best, L(i, j))
        return _ceil_val(best)

    def col_bound(j, n):
        # v(b_i c_ij x^j) >= bT + tau * i for every i
        if T.degree is not None and n > T.degree:
            return VAL_INF
        if tau > 0:
            return _ceil_val(min(Fraction(P), bT + tau * n))
        return _ceil_val(min((L(i, j) for i in range(n, imax)), default=VAL_INF))

    if kappa == VAL_INF:
        table_floor = Fraction(0)
        kappa_floor = 0
    else:
        kappa_floor = kappa
        table_floor = kappa
    need = [P - bT - sT * i for i in range(imax + 1)]
    Q = list(need)
    for i in range(imax - 1, -1, -1):
        Q[i] = max(need[i], Q[i + 1] - kappa_floor)
    table = PowerTable(scaled(S, x), lambda i: Q[i] if i < len(Q) else Q[-1] - kappa_floor * (i - len(Q) + 1),
                       table_floor)

    def entry(i, j):
        if i >= imax:
            return ZERO  # valuation >= P by construction of imax
        b = T.coeff(i)
        if not b:
            return ZERO
        return (b * table.c(i, j)).truncate(P)

    return DoubleArray(entry, jb, None, col_bound)


def substitution_criterion(T: PowerSeries, S: PowerSeries, x: FieldElement, precision: int,
                           window: int = DEFAULT_WINDOW) -> Verdict:
    """Check the substitution theorem's hypotheses at x and compute T(S(x)) both ways.

    Hypothesis "i": S converges at x.  Hypothesis "ii": T converges at
    k_bar = sum |a_j| |x|^j.  Raises HypothesisFailure naming the first one
    that fails.  On success the verdict's sum is sum_j d_j x^j and its
    certificate records the composite value T(S(x)) for comparison.
    """
    k = evaluate(S, x, precision, window)
    if not isinstance(k, Converges):
        raise HypothesisFailure("i", f"S does not converge at x: {k.describe()}", k)
    k_bar = evaluate(abs_series(S), abs(x), precision, window)
    if not isinstance(k_bar, Converges):
        raise HypothesisFailure("i", f"absolute series diverges at |x|: {k_bar.describe()}", k_bar)
    t_bar = eval_at_approx(T, k_bar.sum, precision, window)
    if not isinstance(t_bar, Converges):
        raise HypothesisFailure("ii", f"T at k_bar = {k_bar.sum}: {t_bar.describe()}", t_bar)
    array = _substitution_array(T, S, x, precision)
    if array is None:
        return Unknown()
    formal = iterated_row_sum(array.transpose(), precision, window)
    composite = composite_eval(T, S, x, precision, window)
    if not isinstance(composite, Converges):
        return composite
    agree = formal.agrees(composite.sum, precision)
    cert = SubstitutionCertificate(k.sum, k_bar.sum, formal, composite.sum, agree)
    return Converges(formal, 0, certificate=cert)


def composite_eval(T: PowerSeries, S: PowerSeries, x: FieldElement, precision: int,
                   window: int = DEFAULT_WINDOW) -> Verdict:
    """T(S(x)) computed in two stages, without any rearrangement."""
    aff = T.affine()
    extra = 0
    if T.degree is None and aff is not None:
        extra = max(0, -math.floor(aff.slope + aff.intercept))
    inner_precision = precision + extra
    for _ in range(4):
        k = evaluate(S, x, inner_precision, window)
        if not isinstance(k, Converges):
            return k
        out = eval_at_approx(T, k.sum, precision, window)
        if not isinstance(out, Converges) or out.sum.tail_valuation >= precision:
            return out
        inner_precision += int(math.ceil(precision - out.sum.tail_valuation))
    return out


def neighborhood_radius(T: PowerSeries, S: PowerSeries, precision: int = 16,
                        window: int = DEFAULT_WINDOW) -> int:
    """A valuation V such that the substitution criterion holds whenever v(x) >= V."""
    sa, ta = S.affine(), T.affine()
    if sa is None:
        raise HypothesisFailure("S-domain", "S carries no convergence certificate")
    if ta is None:
        raise HypothesisFailure("T-domain", "T carries no convergence certificate")
    a0 = S.coeff(0)
    u0 = a0.valuation
    if S.degree is not None:
        support = [(m, S.coeff(m).valuation) for m in range(1, S.degree + 1)]
        support = [(m, v) for m, v in support if v != VAL_INF]
        lower = -VAL_INF
    else:
        support = None
        lower = math.floor(-sa.slope) + 1  # S converges for v(x) > -slope
    if a0:
        at = evaluate(T, a0, precision, window)
        if not isinstance(at, Converges):
            raise HypothesisFailure("T-at-a0", f"T at a_0 = {a0}: {at.describe()}", at)
        # all terms a_m x^m with m >= 1 must stay at or above v(a_0)
        if support is not None:
            V = max([math.ceil(Fraction(u0 - v, m)) for m, v in support], default=0)
        else:
            V = math.ceil(u0 - sa.intercept - sa.slope)
    else:
        if T.degree is not None:
            target = -VAL_INF
        else:
            target = -ta.slope  # T converges at every y with v(y) > target
        if support is not None:
            if target == -VAL_INF:
                V = 0
            else:
                V = max([math.floor(Fraction(target - v, m)) + 1 for m, v in support], default=0)
        else:
            V = math.floor(target - sa.slope - sa.intercept) + 1 if target != -VAL_INF else lower
    V = max(V, lower) if lower != -VAL_INF else V
    # a bit of headroom keeps the affine certificate strictly positive
    for extra in range(0, 64):
        cand = V + extra
        if _radius_ok(T, S, cand):
            return cand
    raise HypothesisFailure("radius", "no valuation threshold found")


def _radius_ok(T: PowerSeries, S: PowerSeries, V: int) -> bool:
    from .field import epsilon

    x = epsilon() ** V
    prof = _inner_profile(S, x)
    ta = T.affine()
    if prof is None or ta is None:
        return False
    u0, sigma, k1 = prof
    if T.degree is not None:
        return True
    return ta.slope + min(u0, k1) > 0

