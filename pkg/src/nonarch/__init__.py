"""Exact series calculus over the non-Archimedean field Q((e)).

Modules:

* ``field``: elements of Q((e)) as reduced rational functions in e
* ``series``: simple series with certified tail bounds, reordering, grouping
* ``double``: double series, pairings, Fubini-type sums and their converse
* ``power``: power series, powers, expected coefficients and substitution
* ``faadibruno``: set partitions and derivatives of composites
* ``scenario`` and ``cli``: scenario files and the ``nonarch`` command
"""

from .field import (
    ONE,
    VAL_INF,
    ZERO,
    Expansion,
    FieldElement,
    abs_,
    compare,
    epsilon,
    expand,
    fdot,
    from_rational,
    fsum,
    is_topologically_nilpotent,
    laurent,
    omega,
    valuation,
)
from .parser import ParseError, parse_element, parse_expression
from .series import ApproxElement, Converges, Diverges, TermStream, Unknown, sum_series
from .double import DoubleArray, HypothesisFailure
from .power import AffineBound, PowerSeries

__version__ = "0.1.0"

__all__ = [
    "ONE",
    "VAL_INF",
    "ZERO",
    "Expansion",
    "FieldElement",
    "abs_",
    "compare",
    "epsilon",
    "expand",
    "fdot",
    "from_rational",
    "fsum",
    "is_topologically_nilpotent",
    "laurent",
    "omega",
    "valuation",
    "ParseError",
    "parse_element",
    "parse_expression",
    "ApproxElement",
    "Converges",
    "Diverges",
    "TermStream",
    "Unknown",
    "sum_series",
    "DoubleArray",
    "HypothesisFailure",
    "AffineBound",
    "PowerSeries",
]
