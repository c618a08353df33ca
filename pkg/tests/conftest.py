import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from nonarch.field import FieldElement  # noqa: E402

settings.register_profile("repo", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def laurent_polys(draw, min_shift=-4, max_shift=4, max_len=4):
    shift = draw(st.integers(min_shift, max_shift))
    coeffs = draw(st.lists(rationals, min_size=1, max_size=max_len))
    return FieldElement.from_laurent(shift, coeffs)


@st.composite
def elements(draw, allow_zero=True):
    num = draw(laurent_polys())
    if draw(st.booleans()):
        tail = draw(st.lists(rationals, min_size=1, max_size=3))
        den = FieldElement.from_laurent(0, [Fraction(1)] + tail)
        num = num / den
    if not allow_zero and num.is_zero():
        num = FieldElement(1)
    return num


# -- acceptance summary: one line per criterion ----------------------------------

_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or "::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::test_criterion_", 1)[1]
        _CRITERIA[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda s: (int(s.split("_", 1)[0]), s)):
        number, _, label = name.partition("_")
        terminalreporter.write_line(f"criterion {number:>2} [{label}]: {_CRITERIA[name]}")


@pytest.fixture
def eps():
    from nonarch.field import epsilon

    return epsilon()
