"""
Tests for the existence-bound report and the direct matrix-property checks.
"""

import pytest

from qdesigns.error_handling import DimensionMismatch, UsageError
from qdesigns.services.incidence import build_incidence
from qdesigns.services.klp import (
    ceil_fractional_power,
    check_matrix_properties,
    divisibility_witness,
    klp_report,
)


class TestFractionalPowers:

    @pytest.mark.parametrize("x,num,den,value", [
        (8, 1, 3, 2),
        (10, 1, 2, 4),
        (2, 1, 2, 2),
        (0, 5, 2, 0),
        (1, 52, 5, 1),
        (32, 12, 5, 2 ** 12),
        (3, 0, 7, 1),
    ])
    def test_values(self, x, num, den, value):
        assert ceil_fractional_power(x, num, den) == value

    def test_result_is_tight(self):
        x = 2 ** 40 + 12345
        value = ceil_fractional_power(x, 52, 5)
        assert value ** 5 >= x ** 52
        assert (value - 1) ** 5 < x ** 52

    def test_negative_input_rejected(self):
        with pytest.raises(ValueError):
            ceil_fractional_power(-1, 1, 2)


class TestReport:

    def test_large_k_is_feasible(self):
        report = klp_report(2, 1000, 25, 1)
        assert report.feasible
        assert report.rhs_final < report.B_lower
        assert report.threshold_k_gt_12t and report.threshold_k_gt_12_t_plus_1
        assert report.A_exact is None and report.B_exact is None

    def test_small_k_is_not_feasible(self):
        report = klp_report(2, 1000, 12, 1)
        assert not report.feasible
        assert not report.threshold_k_gt_12t

    def test_exact_values_for_small_n(self):
        report = klp_report(2, 10, 3, 1)
        assert (report.A_exact, report.B_exact) == (1023, 6347715)
        assert report.A_upper == 2 ** 19 and report.B_lower == 2 ** 21
        assert report.budget_below_B is False
        assert not report.feasible

    def test_closed_forms(self):
        report = klp_report(3, 20, 4, 2)
        assert report.c1_bound == 3 ** (4 * 9 + 2 * 18 + 20)
        assert report.c3_bound == 3 ** (2 * 4 * 9)
        assert report.c2 == 1
        assert report.block_budget == 3 ** (12 * 3 * 20)

    def test_constant_scales_the_right_hand_side(self):
        base = klp_report(2, 40, 5, 1)
        assert klp_report(2, 40, 5, 1, constant=7).rhs_final == 7 * base.rhs_final

    def test_bad_parameters(self):
        with pytest.raises(DimensionMismatch):
            klp_report(2, 10, 3, 4)
        with pytest.raises(UsageError):
            klp_report(2, 10, 3, 1, constant=0)


class TestMatrixProperties:

    def test_witness(self):
        assert divisibility_witness(2, 10, 3, 1) == 28 * 1023
        assert divisibility_witness(2, 4, 2, 1) == 6 * 15

    def test_witness_limited_to_small_n(self):
        with pytest.raises(UsageError):
            divisibility_witness(2, 65, 3, 1)

    @pytest.mark.parametrize("q,n,k,t", [(2, 4, 2, 1), (2, 5, 3, 2), (3, 3, 2, 1), (2, 5, 2, 1)])
    def test_all_five_hold(self, q, n, k, t):
        from qdesigns.services.gf_core import make_field

        report = check_matrix_properties(build_incidence(n, k, t, make_field(q)), trials=5, seed=3)
        assert report.passed
        assert report.constant_vector and report.symmetry
        assert report.boundedness == 1

    def test_decodability_skipped_without_room(self, f2):
        report = check_matrix_properties(build_incidence(3, 2, 2, f2), trials=2)
        assert report.local_decodability is None
        assert report.passed
