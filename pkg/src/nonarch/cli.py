"""Command-line front end.

    nonarch eval "(1)/(1-e)" --precision 5
    nonarch series-sum "(-1)^n*e^n" --bound n
    nonarch double-sum "e^(i+j)" --bound n
    nonarch compose --outer "1" --outer-bound 0 --inner "e^j" --inner-bound j --at 1
    nonarch scenario run example-nonsubstitution --json
    nonarch scenario list-builtin

Exit codes: 0 success, 1 a check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import double as dbl
from . import power as pw
from . import series as sr
from .parser import EvalError, ParseError, evaluate, parse_element, parse_expression
from .scenario import ScenarioError, builtin_names, load_scenario, run_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--precision", type=int, default=None, help="work modulo e^P (default 32)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--window", type=int, default=sr.DEFAULT_WINDOW,
                   help="terms sampled when no certificate is available")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="nonarch", description="Exact series calculus over Q((e)).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="evaluate and expand a field element")
    p.add_argument("expr")

    p = sub.add_parser("series-sum", parents=[common], help="sum a series given by its n-th term")
    p.add_argument("term", help="term formula in n")
    p.add_argument("--bound", help="lower bound on the valuation of term(m) for m >= n")

    p = sub.add_parser("double-sum", parents=[common], help="sum a double series a(i, j)")
    p.add_argument("entry", help="entry formula in i and j")
    p.add_argument("--bound", help="lower bound on v(a(i, j)) for i + j >= n")

    p = sub.add_parser("compose", parents=[common], help="T(S(x)) both ways")
    p.add_argument("--outer", required=True, help="coefficient formula of T in j")
    p.add_argument("--outer-bound", help="affine valuation bound of T in j")
    p.add_argument("--inner", required=True, help="coefficient formula of S in j")
    p.add_argument("--inner-bound", help="affine valuation bound of S in j")
    p.add_argument("--at", required=True, help="the point x")

    p = sub.add_parser("scenario", help="run scenario files")
    ssub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    r = ssub.add_parser("run", parents=[common], help="run a built-in scenario or a file")
    r.add_argument("name")
    r.add_argument("--timing", action="store_true", help="include wall time in the report")
    ssub.add_parser("list-builtin", parents=[common], help="list built-in scenarios")
    return parser


def _precision(args) -> int:
    P = 32 if args.precision is None else args.precision
    if P < 1:
        raise ScenarioError("precision must be >= 1")
    return P


def _formula(text: str, var: str):
    node = parse_expression(text)
    return lambda k: evaluate(node, {var: k})


def _bound(text: Optional[str], var: str):
    if text is None:
        return None
    f = _formula(text, var)
    return lambda k: f(k).as_fraction()


def _affine(text: Optional[str]) -> Optional[pw.AffineBound]:
    if text is None:
        return None
    b = _bound(text, "j")
    v0, v1, v2 = b(0), b(1), b(2)
    if v2 - v1 != v1 - v0:
        raise EvalError(f"bound {text!r} is not affine in j")
    return pw.AffineBound(v1 - v0, v0)


def _verdict_dict(v) -> dict:
    out = {"verdict": v.kind}
    if isinstance(v, sr.Converges):
        out.update(value=str(v.sum), tail_valuation=_num(v.sum.tail_valuation),
                   terms_used=v.terms_used)
    elif isinstance(v, sr.Diverges):
        out.update(witness=v.describe())
    return out


def _num(x):
    if x == float("inf"):
        return "inf"
    return int(x) if int(x) == x else str(x)


def _emit(args, data: dict, text: str) -> None:
    print(json.dumps(data, indent=2) if args.json else text)


def _cmd_eval(args) -> int:
    a = parse_element(args.expr)
    P = _precision(args)
    exp = a.expand(P) if not a.is_zero() and a.valuation < P else None
    shown = str(exp) if exp is not None else f"O(e^{P})"
    data = {"input": args.expr, "value": str(a),
            "valuation": _num(a.valuation), "expansion": shown, "precision": P}
    _emit(args, data, shown)
    return EXIT_OK


def _cmd_series_sum(args) -> int:
    s = sr.TermStream(_formula(args.term, "n"), _bound(args.bound, "n"))
    v = sr.sum_series(s, _precision(args), args.window)
    _emit(args, _verdict_dict(v), f"{v.kind}: {v.sum}" if v.converges else v.describe())
    return EXIT_OK


def _cmd_double_sum(args) -> int:
    node = parse_expression(args.entry)
    d = dbl.DoubleArray(lambda i, j: evaluate(node, {"i": i, "j": j}), _bound(args.bound, "n"))
    P = _precision(args)
    try:
        lin, rows, cols = dbl.fubini_sum(d, P, args.window)
    except dbl.HypothesisFailure as exc:
        _emit(args, {"verdict": "hypothesis-failure", "hypothesis": exc.hypothesis,
                     "detail": str(exc)}, str(exc))
        return EXIT_OK
    agree = lin.agrees(rows, P) and lin.agrees(cols, P)
    data = {"verdict": "converges", "linearized": str(lin), "rows": str(rows),
            "columns": str(cols), "agree": agree}
    _emit(args, data, f"linearized: {lin}\nrows:       {rows}\ncolumns:    {cols}\nagree: {agree}")
    return EXIT_OK if agree else EXIT_FAIL


def _cmd_compose(args) -> int:
    T = pw.PowerSeries(_formula(args.outer, "j"), _affine(args.outer_bound), name="T")
    S = pw.PowerSeries(_formula(args.inner, "j"), _affine(args.inner_bound), name="S")
    x = parse_element(args.at)
    P = _precision(args)
    comp = pw.composite_eval(T, S, x, P, args.window)
    data = {"composite": _verdict_dict(comp)}
    lines = [f"T(S(x)): {comp.sum if comp.converges else comp.describe()}"]
    try:
        sub = pw.substitution_criterion(T, S, x, P, args.window)
        data["substitution"] = _verdict_dict(sub)
        lines.append(f"sum d_j x^j: {sub.sum if sub.converges else sub.describe()}")
    except dbl.HypothesisFailure as exc:
        data["substitution"] = {"verdict": "hypothesis-failure", "hypothesis": exc.hypothesis,
                                "detail": str(exc)}
        lines.append(f"substitution criterion: {exc}")
    _emit(args, data, "\n".join(lines))
    return EXIT_OK


def _cmd_scenario(args) -> int:
    if args.action == "list-builtin":
        names = builtin_names()
        _emit(args, {"builtin": names}, "\n".join(names))
        return EXIT_OK
    sc = load_scenario(args.name)
    report = run_scenario(sc, args.precision, args.window, args.seed, args.timing)
    print(report.to_json() if args.json else report.to_text())
    return EXIT_OK if report.passed else EXIT_FAIL


_COMMANDS = {
    "eval": _cmd_eval,
    "series-sum": _cmd_series_sum,
    "double-sum": _cmd_double_sum,
    "compose": _cmd_compose,
    "scenario": _cmd_scenario,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ScenarioError, EvalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
