"""
Tests for q-integers, q-factorials and Gaussian binomials.
"""

from math import comb

import pytest

from qdesigns.config import override_settings
from qdesigns.error_handling import DimensionMismatch, TooManyTerms, UsageError
from qdesigns.services.gf_core import make_field
from qdesigns.services.grassmann import enumerate_subspaces
from qdesigns.services.qcount import (
    check_bounds,
    gl_order,
    pascal_check,
    q_binomial,
    q_binomial_via_factorials,
    q_binomial_via_sum,
    q_factorial,
    q_integer,
)


class TestKnownValues:

    @pytest.mark.parametrize("n,k,q,value", [
        (4, 2, 2, 35),
        (3, 1, 2, 7),
        (5, 2, 3, 1210),
        (4, 2, 3, 130),
        (6, 3, 2, 1395),
        (10, 3, 2, 6347715),
        (0, 0, 5, 1),
        (7, 0, 4, 1),
    ])
    def test_values(self, n, k, q, value):
        assert q_binomial(n, k, q) == value

    def test_zero_outside_range(self):
        assert q_binomial(3, 4, 2) == 0
        assert q_binomial(3, -1, 2) == 0
        assert q_binomial(-1, 0, 2) == 0

    def test_q_integer_and_factorial(self):
        assert q_integer(3, 2) == 7
        assert q_integer(0, 3) == 0
        assert q_factorial(3, 2) == 1 * 3 * 7

    def test_gl_order(self):
        assert gl_order(2, 2) == 6
        assert gl_order(3, 2) == 168

    def test_huge_values_stay_exact(self):
        value = q_binomial(200, 100, 16)
        assert value == q_binomial(200, 100, 16)
        assert value % 16 == 1
        assert value.bit_length() > 4 * 100 * 100


class TestIdentities:
    """Independent routes agree with the product formula."""

    @pytest.mark.parametrize("q", [2, 3, 4, 5])
    def test_symmetry(self, q):
        for n in range(10):
            for k in range(n + 1):
                assert q_binomial(n, k, q) == q_binomial(n, n - k, q)

    @pytest.mark.parametrize("q", [2, 3, 5])
    def test_factorial_and_sum_routes(self, q):
        for n in range(9):
            for k in range(n + 1):
                value = q_binomial(n, k, q)
                assert q_binomial_via_factorials(n, k, q) == value
                assert q_binomial_via_sum(n, k, q) == value

    @pytest.mark.parametrize("q", [2, 3, 4])
    def test_pascal(self, q):
        assert all(pascal_check(n, k, q) for n in range(1, 10) for k in range(n + 1))

    def test_sum_route_respects_term_cap(self):
        with override_settings(MAX_SUM_TERMS=100):
            assert q_binomial_via_sum(8, 2, 2) == q_binomial(8, 2, 2)
            with pytest.raises(TooManyTerms):
                q_binomial_via_sum(12, 6, 2)

    def test_sum_route_rejects_bad_k(self):
        with pytest.raises(DimensionMismatch) as info:
            q_binomial_via_sum(3, 4, 2)
        assert isinstance(info.value, UsageError) and info.value.exit_code == 2

    def test_negative_factorial_is_a_usage_error(self):
        with pytest.raises(DimensionMismatch):
            q_factorial(-1, 2)


class TestBounds:

    def test_bounds_example(self):
        check = check_bounds(5, 2, 3)
        assert (check.lower, check.value, check.upper, check.ok) == (729, 1210, 7290, True)

    def test_bounds_need_k_at_most_n(self):
        with pytest.raises(DimensionMismatch):
            check_bounds(2, 3, 2)

    @pytest.mark.parametrize("q", [2, 3, 4, 5])
    def test_bounds_grid(self, q):
        for n in range(13):
            for k in range(n + 1):
                check = check_bounds(n, k, q)
                assert check.ok
                assert check.upper == comb(n, k) * check.lower


class TestEnumerationAgreement:

    @pytest.mark.parametrize("q,top", [(2, 5), (3, 4), (4, 3), (5, 3)])
    def test_counts_match_enumeration(self, q, top):
        field = make_field(q)
        for n in range(top + 1):
            for k in range(n + 1):
                assert len(enumerate_subspaces(n, k, field)) == q_binomial(n, k, q)

    @pytest.mark.slow
    def test_full_acceptance_grid(self):
        for q, top in ((2, 6), (3, 5), (4, 4), (5, 4)):
            field = make_field(q)
            for n in range(top + 1):
                for k in range(n + 1):
                    assert len(enumerate_subspaces(n, k, field)) == q_binomial(n, k, q)
