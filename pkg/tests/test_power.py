import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonarch.catalog import nonsubstitution_pair
from nonarch.double import HypothesisFailure
from nonarch.field import ZERO, epsilon, from_rational, omega
from nonarch.power import (
    AffineBound,
    PowerSeries,
    PowerTable,
    abs_series,
    cauchy_product,
    composite_eval,
    eval_at_approx,
    evaluate,
    expected_coefficients,
    formal_derivative,
    neighborhood_radius,
    partial_eval,
    power_table,
    scaled,
    sign_flip,
    substitution_criterion,
)
from nonarch.sampling import random_power_series
from nonarch.series import ApproxElement, Converges, Diverges
from oracles import RF, eps, poly_compose_coeffs

E, W = epsilon(), omega()
ONE = RF.const(1)
GEO = PowerSeries.geometric()


def close(approx, oracle: RF, P: int) -> bool:
    return (RF.of(approx.head) - oracle).valuation() >= P and approx.tail_valuation >= P


class TestEvaluate:
    def test_geometric_at_eps_squared(self):
        v = evaluate(GEO, E ** 2, 32)
        assert isinstance(v, Converges)
        assert close(v.sum, ONE / (ONE - eps(2)), 32)

    def test_diverges_on_unit_ball(self):
        v = evaluate(GEO, 2 / (1 - E), 16)
        assert isinstance(v, Diverges)
        assert v.floor == 0

    def test_at_zero_is_constant_term(self):
        S = PowerSeries.from_function(lambda j: W ** j + 3, slope=-1, intercept=0)
        v = evaluate(S, ZERO, 8)
        assert v.sum.exact and v.sum.head == 4

    def test_polynomial_is_exact(self):
        p = PowerSeries.polynomial([1, W, E])
        v = evaluate(p, W, 4)
        assert v.sum.exact and v.sum.head == 1 + W ** 2 + W

    def test_partial_eval(self):
        assert partial_eval(GEO, E, 3) == 1 + E + E ** 2 + E ** 3

    @given(st.integers(0, 10 ** 6), st.integers(1, 3))
    def test_random_against_partial_sums(self, seed, k):
        S = random_power_series(seed, slope=0)
        P = 12
        v = evaluate(S, E ** k, P)
        # beyond j = P / k every term has valuation >= P
        assert v.sum.agrees(partial_eval(S, E ** k, P // k + 1), P)

    def test_sign_flip_is_evaluation_at_minus_x(self):
        S = random_power_series(5, slope=0)
        for x in (E, E ** 2 / (1 + E)):
            a = evaluate(S, -x, 12).sum
            b = evaluate(sign_flip(S), x, 12).sum
            assert a.agrees(b.head, 12)


class TestApproxEvaluation:
    def test_loss_of_precision(self):
        # T = sum (X/e)^i at a point known to e^6 with valuation 2: each term
        # i >= 1 moves by at most e^(6 - 1) so the result is good to e^5
        T = PowerSeries.from_function(lambda i: W ** i, slope=-1)
        v = eval_at_approx(T, ApproxElement(E ** 2, 6), 16)
        assert v.sum.tail_valuation == 5
        assert v.sum.agrees(1 / (1 - E), 5)

    def test_exact_point(self):
        v = eval_at_approx(GEO, ApproxElement.of(E), 8)
        assert close(v.sum, ONE / (ONE - eps()), 8)

    def test_polynomial(self):
        p = PowerSeries.polynomial([0, 0, 1])
        v = eval_at_approx(p, ApproxElement(E, 4), 16)
        # (e + O(e^4))^2 = e^2 + O(e^5)
        assert v.sum.head == E ** 2 and v.sum.tail_valuation == 5


class TestFormal:
    def test_cauchy_square_of_ones(self):
        sq = cauchy_product(GEO, GEO)
        assert [sq[j] for j in range(6)] == [1, 2, 3, 4, 5, 6]
        assert close(evaluate(sq, E, 16).sum, ONE / (ONE - eps()) ** 2, 16)

    def test_cauchy_polynomials(self):
        p = cauchy_product(PowerSeries.polynomial([1, 1]), PowerSeries.polynomial([1, -1]))
        assert p.degree == 2 and [p[j] for j in range(4)] == [1, 0, -1, 0]

    def test_abs_series(self):
        S = PowerSeries.polynomial([-E, W, -3])
        assert [abs_series(S)[j] for j in range(3)] == [E, W, 3]

    def test_scaled(self):
        assert [scaled(GEO, E)[j] for j in range(4)] == [1, E, E ** 2, E ** 3]
        assert scaled(GEO, E).bound == AffineBound(1, 0)

    def test_derivative(self):
        for m in range(5):
            v = evaluate(formal_derivative(GEO, m), E, 12)
            assert close(v.sum, RF.const(math.factorial(m)) / (ONE - eps()) ** (m + 1), 12)

    def test_derivative_of_polynomial(self):
        d = formal_derivative(PowerSeries.polynomial([5, 1, 1, 1]), 2)
        assert d.degree == 1 and [d[j] for j in range(3)] == [2, 6, 0]
        with pytest.raises(ValueError):
            formal_derivative(GEO, -1)


class TestPowerTable:
    def test_binomials(self):
        t = power_table(PowerSeries.polynomial([1, 1]), 6, 8)
        for i in range(7):
            assert [t.c(i, j) for j in range(9)] == [math.comb(i, j) for j in range(9)]

    def test_identity_and_scaling(self):
        t = power_table(PowerSeries.polynomial([0, 1]), 4, 5)
        assert all(t(i, j) == (1 if i == j else 0) for i in range(5) for j in range(6))
        s = power_table(PowerSeries.polynomial([0, E]), 4, 5)
        assert all(s(i, j) == (E ** i if i == j else 0) for i in range(5) for j in range(6))

    def test_geometric_powers(self):
        # (1 / (1 - X))^i has coefficients C(i + j - 1, j)
        t = power_table(GEO, 5, 10)
        assert all(t(i, j) == math.comb(i + j - 1, j) for i in range(1, 6) for j in range(11))

    @settings(max_examples=10)
    @given(st.integers(0, 10 ** 6))
    def test_rows_are_cauchy_powers(self, seed):
        S = random_power_series(seed, slope=1, intercept=-1, rational=True)
        t = power_table(S, 4, 8)
        power = PowerSeries.polynomial([1])
        for i in range(5):
            assert [t(i, j) for j in range(9)] == [power[j] for j in range(9)]
            power = cauchy_product(power, S)

    def test_truncated_rows_agree(self):
        S = random_power_series(3, slope=1, intercept=0)
        exact = power_table(S, 5, 6)
        rough = PowerTable(S, lambda i: 12 - i, 0)
        for i in range(6):
            for j in range(7):
                assert (exact(i, j) - rough(i, j)).valuation >= 12 - i


class TestExpectedCoefficients:
    def test_identity_inner(self):
        T = random_power_series(9, slope=0)
        d = expected_coefficients(T, PowerSeries.polynomial([0, 1]), 6, 16)
        assert all(d(j).sum.head == T[j] for j in range(7))

    def test_scaled_inner(self):
        d = expected_coefficients(GEO, PowerSeries.polynomial([0, E]), 6, 16)
        assert all(d[j].sum.head == E ** j for j in range(7))

    def test_constant_term_propagates(self):
        # d_0 = T(a_0)
        S = PowerSeries.polynomial([E, 1])
        d = expected_coefficients(GEO, S, 4, 16)
        assert close(d(0).sum, ONE / (ONE - eps()), 16)
        # d_j = sum_i C(i, j) e^(i - j) = 1/(1 - e)^(j + 1)
        for j in range(1, 5):
            assert close(d(j).sum, ONE / (ONE - eps()) ** (j + 1), 16)

    def test_nonsubstitution_d0_diverges(self):
        T, S = nonsubstitution_pair()
        d = expected_coefficients(T, S, 2, 16)
        assert isinstance(d(0), Diverges)
        assert not d.all_converge()

    def test_index_range(self):
        with pytest.raises(IndexError):
            expected_coefficients(GEO, GEO, 3, 8).d(4)


class TestSubstitution:
    def test_nonsubstitution(self):
        T, S = nonsubstitution_pair()
        assert evaluate(S, E, 32).sum.agrees(ZERO, 32)
        assert close(evaluate(abs_series(S), E, 32).sum, RF.const(2) * eps() / (ONE - eps()), 32)
        assert composite_eval(T, S, E, 32).sum.agrees(from_rational(1), 32)
        with pytest.raises(HypothesisFailure) as info:
            substitution_criterion(T, S, E, 32)
        assert info.value.hypothesis == "ii"

    def test_inner_divergence(self):
        with pytest.raises(HypothesisFailure) as info:
            substitution_criterion(GEO, GEO, from_rational(1), 8)
        assert info.value.hypothesis == "i"

    def test_eps_x_into_geometric(self):
        S = PowerSeries.polynomial([0, E])
        v = substitution_criterion(GEO, S, from_rational(1), 16)
        assert v.certificate.agree
        assert close(v.sum, ONE / (ONE - eps()), 16)

    def test_two_term_inner(self):
        S = PowerSeries.polynomial([0, E, E ** 2])
        v = substitution_criterion(GEO, S, from_rational(1), 16)
        assert close(v.sum, ONE / (ONE - eps() - eps(2)), 16)
        assert close(v.certificate.composite, ONE / (ONE - eps() - eps(2)), 16)

    @settings(max_examples=15)
    @given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
    def test_polynomials_against_oracle(self, a, b):
        T = PowerSeries.polynomial([random_power_series(a, slope=0)[i] for i in range(4)])
        S = PowerSeries.polynomial([random_power_series(b, slope=1, intercept=1)[j] for j in range(3)])
        x = E
        v = substitution_criterion(T, S, x, 12)
        coeffs = poly_compose_coeffs([RF.of(T[i]) for i in range(4)], [RF.of(S[j]) for j in range(3)], 9)
        want = RF.const(0)
        for j, c in enumerate(coeffs):
            want = want + c * eps(j)
        assert close(v.sum, want, 12)
        assert v.certificate.agree

    @settings(max_examples=15)
    @given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
    def test_series_agree(self, a, b):
        T = random_power_series(a, slope=0)
        S = random_power_series(b, slope=1, intercept=1, rational=True)
        v = substitution_criterion(T, S, from_rational(1), 12)
        assert v.certificate.agree


class TestCriterionProperties:
    @settings(max_examples=10)
    @given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
    def test_d0_convergence_propagates(self, a, b):
        T = random_power_series(a, slope=0)
        S = random_power_series(b, slope=1, intercept=1, rational=True)
        d = expected_coefficients(T, S, 6, 12)
        if d(0).converges:
            assert d.all_converge()

    @settings(max_examples=10)
    @given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.sampled_from([1, 2]))
    def test_negative_argument_is_sign_flip(self, a, b, k):
        T = random_power_series(a, slope=0)
        S = random_power_series(b, slope=1, intercept=1)
        x = E ** k / (1 - E)
        direct = substitution_criterion(T, S, -x, 12)
        flipped = substitution_criterion(T, sign_flip(S), x, 12)
        assert direct.kind == flipped.kind
        assert direct.sum.agrees(flipped.sum.head, 12)
        assert direct.certificate.agree and flipped.certificate.agree


class TestRadius:
    @pytest.mark.parametrize("S", [PowerSeries.polynomial([E, 1]), PowerSeries.polynomial([0, 1])])
    def test_geometric_outer(self, S):
        V = neighborhood_radius(GEO, S)
        assert V == 1
        v = substitution_criterion(GEO, S, E ** V, 12)
        assert v.certificate.agree

    def test_outer_diverges_at_constant_term(self):
        with pytest.raises(HypothesisFailure) as info:
            neighborhood_radius(GEO, PowerSeries.polynomial([1, 1]))
        assert info.value.hypothesis == "T-at-a0"

    def test_uncertified_inner(self):
        with pytest.raises(HypothesisFailure) as info:
            neighborhood_radius(GEO, PowerSeries(lambda j: E ** j))
        assert info.value.hypothesis == "S-domain"

    @settings(max_examples=10)
    @given(st.integers(0, 10 ** 6))
    def test_threshold_works(self, seed):
        S = random_power_series(seed, slope=-1, intercept=1, zero_constant=True)
        V = neighborhood_radius(GEO, S)
        for extra in (0, 2):
            assert substitution_criterion(GEO, S, E ** (V + extra), 10).certificate.agree


def test_affine_bound_horizon():
    b = AffineBound(Fraction(1), Fraction(-2))
    assert b(3) == 1
    assert b.horizon(1, 10) == 6
    assert b.horizon(-1, 10) is None
