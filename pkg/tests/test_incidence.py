"""
Tests for the t-vs-k incidence structure.
"""

from fractions import Fraction

import pytest

from qdesigns.config import override_settings
from qdesigns.error_handling import DimensionMismatch, TooLarge
from qdesigns.services.gf_core import make_field
from qdesigns.services.incidence import (
    average_row,
    boundedness,
    build_incidence,
    check_constant_vector_property,
    check_double_counting,
    check_symmetry_transitivity,
    popcount,
    summarize,
    to_bitmap_text,
)
from qdesigns.services.qcount import q_binomial


class TestBuild:

    def test_fano_plane_matrix(self, f2):
        """Lines vs points of PG(2,2) in canonical order."""
        M = build_incidence(3, 2, 1, f2)
        assert M.shape == (7, 7)
        assert to_bitmap_text(M).splitlines() == [
            "P1",
            "7 7",
            "1010100",
            "1001010",
            "0101100",
            "0110010",
            "1100001",
            "0011001",
            "0000111",
        ]

    def test_t_equal_k_is_identity(self, f2):
        M = build_incidence(2, 1, 1, f2)
        assert [M.entry(b, a) for b in range(3) for a in range(3)] == [1, 0, 0, 0, 1, 0, 0, 0, 1]

    @pytest.mark.parametrize("q,n,k,t", [
        (2, 3, 2, 1), (2, 4, 2, 1), (2, 5, 3, 2), (2, 5, 2, 1), (3, 3, 2, 1), (3, 4, 2, 1),
    ])
    def test_weights(self, q, n, k, t):
        M = build_incidence(n, k, t, make_field(q))
        assert set(M.row_sums()) == {q_binomial(k, t, q)}
        assert set(M.col_sums()) == {q_binomial(n - t, k - t, q)}
        assert check_constant_vector_property(M)
        assert check_double_counting(M)
        assert boundedness(M) == 1

    def test_worker_count_does_not_change_matrix(self, f3):
        assert build_incidence(4, 2, 1, f3, workers=1).bits == build_incidence(4, 2, 1, f3, workers=3).bits

    def test_bit_cap(self, f2):
        with override_settings(MAX_INCIDENCE_BITS=1000):
            with pytest.raises(TooLarge):
                build_incidence(5, 2, 1, f2)

    def test_dimension_order_checked(self, f2):
        with pytest.raises(DimensionMismatch):
            build_incidence(4, 1, 2, f2)


class TestProperties:

    def test_average_row(self, f2):
        assert average_row(build_incidence(4, 2, 1, f2)) == Fraction(1, 5)
        assert average_row(build_incidence(3, 2, 1, f2)) == Fraction(3, 7)

    @pytest.mark.parametrize("n,k,t", [(3, 2, 1), (4, 2, 1), (5, 3, 2)])
    def test_gl_symmetry(self, f2, n, k, t):
        M = build_incidence(n, k, t, f2)
        assert check_symmetry_transitivity(M, trials=20, seed=1, samples=200)

    def test_summary(self, f2):
        summary = summarize(build_incidence(4, 2, 1, f2), symmetry_trials=3, seed=5)
        assert (summary.rows, summary.columns) == (35, 15)
        assert (summary.row_weight, summary.col_weight, summary.c2) == (3, 7, 1)
        assert summary.average_row == "1/5"
        assert summary.symmetry_ok is True

    def test_summary_without_symmetry(self, f3):
        assert summarize(build_incidence(3, 2, 1, f3)).symmetry_ok is None

    def test_popcount(self):
        assert popcount(0) == 0
        assert popcount(0b1011) == 3
        assert popcount(1 << 200) == 1
