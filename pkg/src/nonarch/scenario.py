"""Scenario files: declarative definitions plus checks, run through the library.

A scenario is line oriented; ``#`` starts a comment.  Statements::

    scenario <name>
    precision <P>
    seed <N>
    let <name> = <expr>
    series <S> a(j) = <expr>          coefficient formula (any index name)
    series <S> a(3) = <expr>          single-coefficient override
    series <S> bound(j) = <expr>      affine lower bound on v(a_j)
    series <S> degree = <D>           a_j = 0 for j > D
    stream <s> term(n) = <expr>
    stream <s> bound(n) = <expr>      lower bound on v(term(m)) for m >= n
    array <A> entry(i,j) = <expr>     (entry(i,0) etc. override a row or column)
    array <A> bound(n) = <expr>       joint bound for i + j >= n
    array <A> rowbound(i,n) = <expr>
    array <A> colbound(j,n) = <expr>
    check value <Q> == <expr>         agrees modulo e^P
    check exact <Q> == <expr>         exact equality
    check valuation <Q> == <expr>
    check verdict <Q> is converges|diverges|unknown|hypothesis-failure[:<name>]
    check property <name> <count>     seeded randomized property

Any value, valuation or verdict check may end in ``for <var> in <a>..<b>``
(inclusive).  Quantities ``<Q>`` are calls such as ``eval(S, x)``; see
``QUANTITIES``.
"""

from __future__ import annotations

import json
import random
import re
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from . import double as dbl
from . import power as pw
from . import series as sr
from .faadibruno import blowup_example
from .field import FieldElement, from_rational
from .parser import Call, EvalError, Name, Node, ParseError, evaluate, parse_element, parse_expression

__all__ = [
    "ScenarioError",
    "Scenario",
    "CheckResult",
    "Report",
    "parse_scenario",
    "load_scenario",
    "run_scenario",
    "builtin_names",
    "builtin_text",
    "REPORT_KEYS",
    "CHECK_KEYS",
]

REPORT_KEYS = ("scenario", "precision", "seed", "window", "passed", "checks")
CHECK_KEYS = ("line", "check", "passed", "computed", "expected", "certificate", "detail")


class ScenarioError(ValueError):
    """Malformed scenario; carries the 1-based line number."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class _SeriesDef:
    general: Optional[tuple] = None          # (index name, node)
    fixed: dict = field(default_factory=dict)
    bound: Optional[tuple] = None
    degree: Optional[int] = None


@dataclass
class _StreamDef:
    term: Optional[tuple] = None
    bound: Optional[tuple] = None


@dataclass
class _ArrayDef:
    rules: list = field(default_factory=list)  # (pattern args, node), most specific first
    bound: Optional[tuple] = None
    rowbound: Optional[tuple] = None
    colbound: Optional[tuple] = None


@dataclass
class _Check:
    line: int
    text: str
    kind: str
    quantity: Optional[Node]
    expected: object
    loop: Optional[tuple] = None


@dataclass
class Scenario:
    name: str
    precision: int = 32
    seed: int = 0
    lets: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    streams: dict = field(default_factory=dict)
    arrays: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)


@dataclass
class CheckResult:
    line: int
    check: str
    passed: bool
    computed: str = ""
    expected: str = ""
    certificate: str = ""
    detail: str = ""


@dataclass
class Report:
    scenario: str
    precision: int
    seed: int
    window: int
    checks: list
    wall_time: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        out = {
            "scenario": self.scenario,
            "precision": self.precision,
            "seed": self.seed,
            "window": self.window,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
        }
        if self.wall_time is not None:
            out["wall_time"] = round(self.wall_time, 6)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"scenario {self.scenario} (precision {self.precision}, seed {self.seed})"]
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"  {mark}  line {c.line}: {c.check}")
            if c.computed:
                lines.append(f"        computed: {c.computed}")
            if not c.passed and c.detail:
                lines.append(f"        {c.detail}")
        total = sum(c.passed for c in self.checks)
        lines.append(f"{total}/{len(self.checks)} checks passed")
        if self.wall_time is not None:
            lines.append(f"wall time {self.wall_time:.3f}s")
        return "\n".join(lines)


# -- parsing ------------------------------------------------------------------

_HEAD = re.compile(r"^(\w+)\s*\(([^)]*)\)\s*=\s*(.+)$")
_CHECK = re.compile(
    r"^check\s+(value|exact|valuation|verdict)\s+(.+?)\s+(==|is)\s+(.+?)"
    r"(?:\s+for\s+([A-Za-z_]\w*)\s+in\s+(-?\d+)\s*\.\.\s*(-?\d+))?\s*$")
_PROPERTY = re.compile(r"^check\s+property\s+([\w-]+)\s+(\d+)\s*$")
_VERDICTS = ("converges", "diverges", "unknown", "hypothesis-failure")


def _expr(text: str, line: int) -> Node:
    try:
        return parse_expression(text)
    except ParseError as exc:
        raise ScenarioError(f"{exc.message} at offset {exc.position} in {text!r}", line) from None


def _args(text: str, line: int) -> list:
    parts = [p.strip() for p in text.split(",")]
    out = []
    for p in parts:
        if re.fullmatch(r"-?\d+", p):
            out.append(int(p))
        elif re.fullmatch(r"[A-Za-z_]\w*", p):
            out.append(p)
        else:
            raise ScenarioError(f"bad argument {p!r}", line)
    return out


def _int(text: str, line: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ScenarioError(f"{what} must be an integer, got {text!r}", line) from None


def parse_scenario(text: str, name: str = "") -> Scenario:
    sc = Scenario(name or "unnamed")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "scenario":
            sc.name = rest or sc.name
        elif word == "precision":
            sc.precision = _int(rest, lineno, "precision")
            if sc.precision < 1:
                raise ScenarioError("precision must be >= 1", lineno)
        elif word == "seed":
            sc.seed = _int(rest, lineno, "seed")
        elif word == "let":
            m = re.match(r"^([A-Za-z_]\w*)\s*=\s*(.+)$", rest)
            if not m:
                raise ScenarioError("expected 'let <name> = <expr>'", lineno)
            node = _expr(m.group(2), lineno)
            try:
                sc.lets[m.group(1)] = evaluate(node, sc.lets)
            except EvalError as exc:
                raise ScenarioError(str(exc), lineno) from None
        elif word in ("series", "stream", "array"):
            _parse_definition(sc, word, rest, lineno)
        elif word == "check":
            sc.checks.append(_parse_check(line, lineno))
        else:
            raise ScenarioError(f"unknown statement {word!r}", lineno)
    return sc


def _parse_definition(sc: Scenario, word: str, rest: str, line: int) -> None:
    m = re.match(r"^([A-Za-z_]\w*)\s+(.+)$", rest)
    if not m:
        raise ScenarioError(f"expected '{word} <name> ...'", line)
    name, body = m.group(1), m.group(2)
    if word == "series":
        d = sc.series.setdefault(name, _SeriesDef())
        dm = re.match(r"^degree\s*=\s*(\d+)$", body)
        if dm:
            d.degree = int(dm.group(1))
            return
    elif word == "stream":
        d = sc.streams.setdefault(name, _StreamDef())
    else:
        d = sc.arrays.setdefault(name, _ArrayDef())
    hm = _HEAD.match(body)
    if not hm:
        raise ScenarioError(f"expected '<head>(<args>) = <expr>' in {word} {name}", line)
    head, args, node = hm.group(1), _args(hm.group(2), line), _expr(hm.group(3), line)
    key = (word, head, len(args))
    if key == ("series", "a", 1):
        if isinstance(args[0], int):
            d.fixed[args[0]] = node
        else:
            d.general = (args[0], node)
    elif key == ("series", "bound", 1) and isinstance(args[0], str):
        d.bound = (args[0], node)
    elif key == ("stream", "term", 1) and isinstance(args[0], str):
        d.term = (args[0], node)
    elif key == ("stream", "bound", 1) and isinstance(args[0], str):
        d.bound = (args[0], node)
    elif key == ("array", "entry", 2):
        d.rules.append((tuple(args), node))
        d.rules.sort(key=lambda r: -sum(isinstance(a, int) for a in r[0]))
    elif key == ("array", "bound", 1) and isinstance(args[0], str):
        d.bound = (args[0], node)
    elif key == ("array", "rowbound", 2) and all(isinstance(a, str) for a in args):
        d.rowbound = (tuple(args), node)
    elif key == ("array", "colbound", 2) and all(isinstance(a, str) for a in args):
        d.colbound = (tuple(args), node)
    else:
        raise ScenarioError(f"unknown {word} clause {head}({', '.join(map(str, args))})", line)


def _parse_check(line: str, lineno: int) -> _Check:
    pm = _PROPERTY.match(line)
    if pm:
        name = pm.group(1)
        if name not in PROPERTIES:
            raise ScenarioError(f"unknown property {name!r}", lineno)
        return _Check(lineno, line, "property", None, (name, int(pm.group(2))))
    m = _CHECK.match(line)
    if not m:
        raise ScenarioError("malformed check", lineno)
    kind, qtext, op, rhs = m.group(1), m.group(2), m.group(3), m.group(4)
    quantity = _expr(qtext, lineno)
    if not isinstance(quantity, Call) or quantity.func not in QUANTITIES:
        raise ScenarioError(f"unknown quantity {qtext!r}", lineno)
    if kind == "verdict":
        if op != "is":
            raise ScenarioError("verdict checks use 'is'", lineno)
        base, _, hyp = rhs.partition(":")
        if base not in _VERDICTS or (hyp and base != "hypothesis-failure"):
            raise ScenarioError(f"unknown verdict {rhs!r}", lineno)
        expected: object = (base, hyp or None)
    else:
        if op != "==":
            raise ScenarioError(f"{kind} checks use '=='", lineno)
        expected = _expr(rhs, lineno)
    loop = None
    if m.group(5):
        loop = (m.group(5), int(m.group(6)), int(m.group(7)))
    return _Check(lineno, line, kind, quantity, expected, loop)


# -- building library objects ---------------------------------------------------

def _fraction(value: FieldElement, what: str) -> Fraction:
    try:
        return value.as_fraction()
    except ValueError:
        raise EvalError(f"{what} must be rational, got {value}") from None


class _Context:
    def __init__(self, sc: Scenario, precision: int, window: int, seed: int):
        self.sc, self.precision, self.window, self.seed = sc, precision, window, seed
        self._series: dict = {}
        self._streams: dict = {}
        self._arrays: dict = {}
        self.blowups: dict = {}

    def env(self, **extra) -> dict:
        env = dict(self.sc.lets)
        env.update(extra)
        return env

    def value(self, node: Node, **extra) -> FieldElement:
        return evaluate(node, self.env(**extra))

    def integer(self, node: Node, **extra) -> int:
        v = self.value(node, **extra)
        try:
            return v.as_int()
        except ValueError:
            raise EvalError(f"expected an integer, got {v}") from None

    def series(self, name: str) -> pw.PowerSeries:
        if name not in self._series:
            d = self.sc.series.get(name)
            if d is None:
                raise EvalError(f"undefined series {name!r}")
            self._series[name] = self._build_series(name, d)
        return self._series[name]

    def _build_series(self, name: str, d: _SeriesDef) -> pw.PowerSeries:
        if d.general is None and not d.fixed:
            raise EvalError(f"series {name!r} has no coefficients")
        fixed = {k: self.value(node) for k, node in d.fixed.items()}
        general = d.general

        def coeff(j):
            if j in fixed:
                return fixed[j]
            if general is None:
                return from_rational(0)
            return self.value(general[1], **{general[0]: j})

        bound = None
        if d.bound is not None:
            var, node = d.bound
            b = [_fraction(self.value(node, **{var: k}), "series bound") for k in range(3)]
            if b[2] - b[1] != b[1] - b[0]:
                raise EvalError(f"bound of series {name!r} is not affine in {var}")
            bound = pw.AffineBound(b[1] - b[0], b[0])
        S = pw.PowerSeries(coeff, bound, d.degree, name=name)
        if bound is not None:
            for j in range(16):
                if S.coeff(j).valuation < bound(j):
                    raise EvalError(f"series {name!r} violates its bound at j = {j}")
        return S

    def stream(self, name: str) -> sr.TermStream:
        if name not in self._streams:
            d = self.sc.streams.get(name)
            if d is None or d.term is None:
                raise EvalError(f"undefined stream {name!r}")
            var, node = d.term
            term = lambda n: self.value(node, **{var: n})  # noqa: E731
            tail = None
            if d.bound is not None:
                bvar, bnode = d.bound
                tail = lambda n: _fraction(self.value(bnode, **{bvar: n}), "stream bound")  # noqa: E731
            self._streams[name] = sr.TermStream(term, tail).cached()
        return self._streams[name]

    def array(self, name: str) -> dbl.DoubleArray:
        if name not in self._arrays:
            d = self.sc.arrays.get(name)
            if d is None or not d.rules:
                raise EvalError(f"undefined array {name!r}")
            self._arrays[name] = self._build_array(d)
        return self._arrays[name]

    def _build_array(self, d: _ArrayDef) -> dbl.DoubleArray:
        cache: dict = {}

        def entry(i, j):
            if (i, j) in cache:
                return cache[(i, j)]
            for pattern, node in d.rules:
                env = {}
                for a, v in zip(pattern, (i, j)):
                    if isinstance(a, int):
                        if a != v:
                            break
                    else:
                        env[a] = v
                else:
                    cache[(i, j)] = self.value(node, **env)
                    return cache[(i, j)]
            raise EvalError(f"no entry rule covers ({i}, {j})")

        def bound1(decl):
            if decl is None:
                return None
            var, node = decl
            return lambda n: _fraction(self.value(node, **{var: n}), "array bound")

        def bound2(decl):
            if decl is None:
                return None
            (a, b), node = decl
            return lambda x, n: _fraction(self.value(node, **{a: x, b: n}), "array bound")

        return dbl.DoubleArray(entry, bound1(d.bound), bound2(d.rowbound), bound2(d.colbound))


# -- quantities -----------------------------------------------------------------

def _names(call: Call, count: int) -> list:
    if len(call.args) < count:
        raise EvalError(f"{call.func} needs {count} arguments")
    out = []
    for a in call.args[:count]:
        if not isinstance(a, Name):
            raise EvalError(f"{call.func}: expected a name, got an expression")
        out.append(a.name)
    return out


def _q_eval(ctx, call, env):
    (s,) = _names(call, 1)
    return pw.evaluate(ctx.series(s), ctx.value(call.args[1], **env), ctx.precision, ctx.window)


def _q_abseval(ctx, call, env):
    (s,) = _names(call, 1)
    x = ctx.value(call.args[1], **env)
    return pw.evaluate(pw.abs_series(ctx.series(s)), abs(x), ctx.precision, ctx.window)


def _q_partialeval(ctx, call, env):
    (s,) = _names(call, 1)
    return pw.partial_eval(ctx.series(s), ctx.value(call.args[1], **env),
                           ctx.integer(call.args[2], **env))


def _q_sum(ctx, call, env):
    (s,) = _names(call, 1)
    return sr.sum_series(ctx.stream(s), ctx.precision, ctx.window)


def _q_partial(ctx, call, env):
    (s,) = _names(call, 1)
    return sr.partial_sum(ctx.stream(s), ctx.integer(call.args[1], **env))


def _q_d(ctx, call, env):
    t, s = _names(call, 2)
    j = ctx.integer(call.args[2], **env)
    return pw.expected_coefficients(ctx.series(t), ctx.series(s), j, ctx.precision, ctx.window).d(j)


def _q_compose(ctx, call, env):
    t, s = _names(call, 2)
    return pw.composite_eval(ctx.series(t), ctx.series(s), ctx.value(call.args[2], **env),
                             ctx.precision, ctx.window)


def _q_substitute(ctx, call, env):
    t, s = _names(call, 2)
    return pw.substitution_criterion(ctx.series(t), ctx.series(s), ctx.value(call.args[2], **env),
                                     ctx.precision, ctx.window)


def _q_row(ctx, call, env):
    (a,) = _names(call, 1)
    return dbl.row_sum(ctx.array(a), ctx.integer(call.args[1], **env), ctx.precision, ctx.window)


def _q_col(ctx, call, env):
    (a,) = _names(call, 1)
    return dbl.column_sum(ctx.array(a), ctx.integer(call.args[1], **env), ctx.precision, ctx.window)


def _q_rowpartial(ctx, call, env):
    (a,) = _names(call, 1)
    A = ctx.array(a)
    i, N = ctx.integer(call.args[1], **env), ctx.integer(call.args[2], **env)
    return sr.partial_sum(sr.TermStream(lambda j: A.entry(i, j)), N)


def _q_fubini(ctx, call, env):
    (a,) = _names(call, 1)
    lin, rows, cols = dbl.fubini_sum(ctx.array(a), ctx.precision, ctx.window)
    P = ctx.precision
    if not (lin.agrees(rows, P) and lin.agrees(cols, P)):
        raise EvalError(f"Fubini sums disagree: {lin} / {rows} / {cols}")
    return sr.Converges(lin, 0, certificate="fubini: linearized = rows = columns")


def _q_converse(ctx, call, env):
    (a,) = _names(call, 1)
    return dbl.converse_criterion(ctx.array(a), ctx.precision, ctx.window)


def _q_linear(ctx, call, env):
    (a,) = _names(call, 1)
    return dbl.linear_sum(ctx.array(a), ctx.precision, None, ctx.window)


def _q_antidiag(ctx, call, env):
    (a,) = _names(call, 1)
    value = dbl.partition_sum(ctx.array(a), dbl.antidiagonal_partition(), ctx.precision)
    return sr.Converges(value, 0, certificate="antidiagonal partition")


def _q_product(ctx, call, env):
    b, c = _names(call, 2)
    value = dbl.product_series(ctx.stream(b), ctx.stream(c), ctx.precision, ctx.window)
    return sr.Converges(value, 0, certificate="product double series")


def _blowup_args(ctx, call, env):
    n = ctx.integer(call.args[0], **env)
    if not 1 <= n <= 8:
        raise EvalError("blow-up order must be in 1..8")
    a2 = ctx.value(call.args[1], **env) if len(call.args) > 1 else None
    key = (ctx.precision, a2)
    if key not in ctx.blowups:
        ctx.blowups[key] = blowup_example(8, ctx.precision, a2)
    return n, ctx.blowups[key][n - 1]


def _q_deriv(ctx, call, env):
    (s,) = _names(call, 1)
    return pw.formal_derivative(ctx.series(s), ctx.integer(call.args[1], **env)).coeff(0)


def _q_blowup(ctx, call, env):
    _, row = _blowup_args(ctx, call, env)
    return sr.Converges(row.value, 0, certificate="faa di bruno over set partitions")


def _q_blowupsingle(ctx, call, env):
    _, row = _blowup_args(ctx, call, env)
    return _Valuation(row.singletons_valuation)


def _q_blowupothers(ctx, call, env):
    _, row = _blowup_args(ctx, call, env)
    return _Valuation(row.others_valuation)


@dataclass(frozen=True)
class _Valuation:
    value: Optional[float]


QUANTITIES: dict[str, Callable] = {
    "eval": _q_eval,
    "abseval": _q_abseval,
    "partialeval": _q_partialeval,
    "sum": _q_sum,
    "partial": _q_partial,
    "d": _q_d,
    "compose": _q_compose,
    "substitute": _q_substitute,
    "row": _q_row,
    "col": _q_col,
    "rowpartial": _q_rowpartial,
    "fubini": _q_fubini,
    "converse": _q_converse,
    "linear": _q_linear,
    "antidiag": _q_antidiag,
    "product": _q_product,
    "deriv": _q_deriv,
    "blowup": _q_blowup,
    "blowupsingle": _q_blowupsingle,
    "blowupothers": _q_blowupothers,
}


# -- properties -----------------------------------------------------------------

def _prop_roundtrip(rng: random.Random, precision: int) -> Optional[str]:
    from .sampling import random_element

    a = random_element(rng)
    back = parse_element(str(a))
    return None if back == a else f"{a} re-parsed as {back}"


def _prop_field_axioms(rng: random.Random, precision: int) -> Optional[str]:
    from .sampling import random_element

    a, b, c = (random_element(rng) for _ in range(3))
    if (a + b) + c != a + (b + c) or (a * b) * c != a * (b * c):
        return f"associativity fails for {a}, {b}, {c}"
    if a * (b + c) != a * b + a * c:
        return f"distributivity fails for {a}, {b}, {c}"
    if a and a * a.inverse() != 1:
        return f"inverse fails for {a}"
    if (a + b).valuation < min(a.valuation, b.valuation):
        return f"ultrametric inequality fails for {a}, {b}"
    return None


def _prop_fubini(rng: random.Random, precision: int) -> Optional[str]:
    from .sampling import random_array

    A = random_array(rng.randrange(1 << 30))
    lin, rows, cols = dbl.fubini_sum(A, precision)
    if not (lin.agrees(rows, precision) and lin.agrees(cols, precision)):
        return f"Fubini sums disagree: {lin} / {rows} / {cols}"
    return None


def _prop_product(rng: random.Random, precision: int) -> Optional[str]:
    from .sampling import random_stream

    b, c = random_stream(rng.randrange(1 << 30)), random_stream(rng.randrange(1 << 30))
    prod = dbl.product_series(b, c, precision)
    # factors may have negative valuation, so they need extra precision
    margin = max(0, -b.tail_bound(0)) + max(0, -c.tail_bound(0))
    sb, sc = sr.sum_series(b, precision + margin), sr.sum_series(c, precision + margin)
    if not prod.agrees(sb.sum * sc.sum, precision):
        return f"product {prod} differs from {sb.sum} * {sc.sum}"
    return None


def _prop_reorder(rng: random.Random, precision: int) -> Optional[str]:
    from .sampling import random_stream

    s = random_stream(rng.randrange(1 << 30))
    base = sr.sum_series(s, precision).sum
    for f, g in (sr.pair_swap(), sr.block_reversal(4)):
        other = sr.sum_series(sr.reorder(s, f, g), precision).sum
        if not base.agrees(other, precision):
            return f"reordered sum {other} differs from {base}"
    grouped = sr.sum_series(sr.group_pairs(s), precision).sum
    return None if base.agrees(grouped, precision) else f"grouped sum {grouped} differs from {base}"


PROPERTIES: dict[str, Callable] = {
    "roundtrip": _prop_roundtrip,
    "field-axioms": _prop_field_axioms,
    "fubini": _prop_fubini,
    "product": _prop_product,
    "reorder": _prop_reorder,
}


# -- running --------------------------------------------------------------------

def _verdict_name(outcome) -> tuple:
    if isinstance(outcome, dbl.HypothesisFailure):
        return "hypothesis-failure", outcome.hypothesis
    if isinstance(outcome, sr.Verdict):
        return outcome.kind, None
    return "converges", None


def _certificate(outcome) -> str:
    if isinstance(outcome, sr.Converges):
        cert = outcome.certificate
        if isinstance(cert, pw.SubstitutionCertificate):
            return (f"substitution: k = {cert.k}, k_bar = {cert.k_bar}, "
                    f"T(k) = {cert.composite}, agree = {cert.agree}")
        if cert:
            return str(cert)
        return f"tail bound after {outcome.terms_used} terms"
    if isinstance(outcome, sr.Diverges):
        return outcome.describe()
    return ""


def _show(outcome) -> str:
    if isinstance(outcome, dbl.HypothesisFailure):
        return f"hypothesis-failure:{outcome.hypothesis}"
    if isinstance(outcome, sr.Converges):
        return str(outcome.sum)
    if isinstance(outcome, sr.Verdict):
        return outcome.kind
    if isinstance(outcome, _Valuation):
        return f"valuation {outcome.value}"
    return str(outcome)


def _compute(ctx: _Context, quantity: Call, env: dict):
    try:
        return QUANTITIES[quantity.func](ctx, quantity, env)
    except dbl.HypothesisFailure as exc:
        return exc


def _judge(ctx: _Context, check: _Check, env: dict) -> tuple:
    """(passed, computed text, expected text, certificate, detail) for one case."""
    outcome = _compute(ctx, check.quantity, env)
    shown, cert = _show(outcome), _certificate(outcome)
    P = ctx.precision
    if check.kind == "verdict":
        base, hyp = check.expected
        got, got_hyp = _verdict_name(outcome)
        ok = got == base and (hyp is None or hyp == got_hyp)
        want = base + (f":{hyp}" if hyp else "")
        return ok, shown, want, cert, "" if ok else f"verdict {got}" + (f":{got_hyp}" if got_hyp else "")
    if check.kind == "valuation":
        want = ctx.integer(check.expected, **env)
        if isinstance(outcome, _Valuation):
            got = outcome.value
        elif isinstance(outcome, sr.Converges):
            got = outcome.sum.valuation
        elif isinstance(outcome, FieldElement):
            got = outcome.valuation
        else:
            return False, shown, str(want), cert, "no value to take a valuation of"
        ok = got == want
        return ok, shown, str(want), cert, "" if ok else f"valuation {got} (undetermined if None)"
    want = ctx.value(check.expected, **env)
    if isinstance(outcome, sr.Converges):
        value = outcome.sum
    elif isinstance(outcome, FieldElement):
        value = sr.ApproxElement.of(outcome)
    else:
        return False, shown, str(want), cert, "quantity has no value"
    if check.kind == "exact":
        ok = value.exact and value.head == want
        detail = "" if ok else ("value only known modulo e^%s" % value.tail_valuation
                                if not value.exact else f"difference {value.head - want}")
        return ok, shown, str(want), cert, detail
    ok = value.agrees(want, P)
    return ok, shown, str(want), cert, "" if ok else f"differs from expected modulo e^{P}"


def _run_check(ctx: _Context, check: _Check) -> CheckResult:
    try:
        if check.kind == "property":
            name, count = check.expected
            rng = random.Random(f"{ctx.seed}:{name}")
            for k in range(count):
                problem = PROPERTIES[name](rng, min(ctx.precision, 16))
                if problem:
                    return CheckResult(check.line, check.text, False, f"case {k}", "", "", problem)
            return CheckResult(check.line, check.text, True, f"{count} cases", "", "")
        if check.loop is None:
            ok, shown, want, cert, detail = _judge(ctx, check, {})
            return CheckResult(check.line, check.text, ok, shown, want, cert, detail)
        var, lo, hi = check.loop
        first = None
        for v in range(lo, hi + 1):
            ok, shown, want, cert, detail = _judge(ctx, check, {var: v})
            if first is None:
                first = (shown, want, cert)
            if not ok:
                return CheckResult(check.line, check.text, False, shown, want, cert,
                                   f"{var} = {v}: {detail}")
        shown, want, cert = first or ("", "", "")
        return CheckResult(check.line, check.text, True, f"{hi - lo + 1} cases; first: {shown}",
                           want, cert)
    except (EvalError, ValueError, ZeroDivisionError, ArithmeticError) as exc:
        return CheckResult(check.line, check.text, False, "", "", "", f"error: {exc}")


def run_scenario(sc: Scenario, precision: Optional[int] = None, window: int = sr.DEFAULT_WINDOW,
                 seed: Optional[int] = None, timing: bool = False) -> Report:
    """Run every check in order.  ``precision`` and ``seed`` override the file's values."""
    start = time.perf_counter()
    P = sc.precision if precision is None else precision
    S = sc.seed if seed is None else seed
    ctx = _Context(sc, P, window, S)
    results = [_run_check(ctx, c) for c in sc.checks]
    wall = time.perf_counter() - start if timing else None
    return Report(sc.name, P, S, window, results, wall)


# -- built-in scenarios -----------------------------------------------------------

def _builtin_dir():
    return resources.files("nonarch") / "scenarios"


def builtin_names() -> list:
    return sorted(p.name[:-4] for p in _builtin_dir().iterdir() if p.name.endswith(".scn"))


def builtin_text(name: str) -> str:
    path = _builtin_dir() / f"{name}.scn"
    if not path.is_file():
        raise ScenarioError(f"no built-in scenario named {name!r}")
    return path.read_text()


def load_scenario(name_or_path: str) -> Scenario:
    """A built-in scenario by name, or a scenario file by path."""
    if name_or_path in builtin_names():
        return parse_scenario(builtin_text(name_or_path), name_or_path)
    path = Path(name_or_path)
    if not path.is_file():
        raise ScenarioError(f"no built-in scenario or file named {name_or_path!r}")
    return parse_scenario(path.read_text(), path.stem)


