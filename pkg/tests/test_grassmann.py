"""
Tests for canonical subspaces, enumeration and the GL action.
"""

import pytest

from qdesigns.config import override_settings
from qdesigns.error_handling import AmbientMismatch, DimensionMismatch, SingularMap, TooLarge
from qdesigns.services.gf_core import MatrixGFq, make_field, random_invertible
from qdesigns.services.grassmann import (
    apply_map,
    contains,
    enumerate_subspaces,
    extensions,
    full_space,
    intersect_dim,
    map_between,
    mask_dim,
    parse_rows,
    stacked_rank,
    subspace_from_rows,
    subspaces_within,
    sum_space,
)
from qdesigns.services.qcount import q_binomial


class TestCanonicalForm:
    """RREF identity for subspaces."""

    def test_any_basis_gives_same_subspace(self, f2):
        a = subspace_from_rows(f2, 3, [(1, 1, 0), (0, 1, 1)])
        b = subspace_from_rows(f2, 3, [(1, 0, 1), (1, 1, 0), (0, 1, 1)])
        assert a == b
        assert hash(a) == hash(b)
        assert a.format_rows() == ["101", "011"]

    def test_dependent_rows_drop_rank(self, f3):
        V = subspace_from_rows(f3, 3, [(1, 2, 0), (2, 1, 0)])
        assert V.k == 1
        assert V.format_rows() == ["120"]

    def test_parse_rows(self, f3):
        assert parse_rows(f3, ["120", " 012 "]) == [(1, 2, 0), (0, 1, 2)]

    def test_ambient_length_checked(self, f2):
        with pytest.raises(DimensionMismatch):
            subspace_from_rows(f2, 3, [(1, 0)])


class TestEnumeration:

    def test_canonical_order_f2_3_2(self, f2):
        """Pivot sets first, then free entries with the last position fastest."""
        listed = [V.format_rows() for V in enumerate_subspaces(3, 2, f2)]
        assert listed == [
            ["100", "010"], ["100", "011"], ["101", "010"], ["101", "011"],
            ["100", "001"], ["110", "001"],
            ["010", "001"],
        ]

    def test_lines_of_f2_2(self, f2):
        assert [V.format_rows() for V in enumerate_subspaces(2, 1, f2)] == [["10"], ["11"], ["01"]]

    @pytest.mark.parametrize("q,n", [(2, 5), (3, 4), (4, 3)])
    def test_strictly_increasing(self, q, n):
        field = make_field(q)
        for k in range(n + 1):
            keys = [V.sort_key for V in enumerate_subspaces(n, k, field)]
            assert keys == sorted(keys)
            assert len(set(keys)) == len(keys)

    def test_worker_count_does_not_change_order(self, f3):
        assert enumerate_subspaces(4, 2, f3, workers=1) == enumerate_subspaces(4, 2, f3, workers=4)

    def test_cap_is_enforced(self, f2):
        with override_settings(MAX_ENUMERATION=100):
            with pytest.raises(TooLarge):
                enumerate_subspaces(6, 3, f2)

    def test_bad_dimensions(self, f2):
        with pytest.raises(DimensionMismatch):
            enumerate_subspaces(3, 4, f2)


class TestPredicates:

    def test_containment_and_intersection(self, f2):
        U = subspace_from_rows(f2, 4, [(1, 0, 0, 0), (0, 1, 0, 0)])
        V = subspace_from_rows(f2, 4, [(1, 1, 0, 0)])
        W = subspace_from_rows(f2, 4, [(0, 1, 0, 0), (0, 0, 1, 0)])
        assert contains(U, V)
        assert not contains(V, U)
        assert intersect_dim(U, W) == 1
        assert stacked_rank(U, W) == 3
        assert sum_space(U, W).k == 3

    @pytest.mark.parametrize("q,n", [(2, 4), (3, 3)])
    def test_intersection_matches_vector_sets(self, q, n):
        field = make_field(q)
        everything = [V for k in range(n + 1) for V in enumerate_subspaces(n, k, field)]
        for U in everything:
            for V in everything:
                d = intersect_dim(U, V)
                assert d == mask_dim(U.span_mask & V.span_mask, q)
                assert d + stacked_rank(U, V) == U.k + V.k

    def test_different_ambients_rejected(self, f2, f3):
        with pytest.raises(AmbientMismatch):
            contains(full_space(f2, 3), full_space(f3, 3))
        with pytest.raises(AmbientMismatch):
            intersect_dim(full_space(f2, 3), full_space(f2, 4))


class TestExtensions:

    @pytest.mark.parametrize("q,n", [(2, 4), (3, 3)])
    def test_extension_counts(self, q, n):
        field = make_field(q)
        for t in range(n + 1):
            for V in enumerate_subspaces(n, t, field):
                for k in range(t, n + 1):
                    over = extensions(V, k)
                    assert len(over) == q_binomial(n - t, k - t, q)
                    assert all(contains(U, V) for U in over)

    def test_subspaces_within(self, f3):
        U = subspace_from_rows(f3, 4, [(1, 0, 1, 0), (0, 1, 0, 2)])
        lines = subspaces_within(U, 1)
        assert len(lines) == 4
        assert all(contains(U, L) for L in lines)
        assert subspaces_within(U, 2) == [U]

    def test_extension_dimension_checked(self, f2):
        V = subspace_from_rows(f2, 3, [(1, 0, 0), (0, 1, 0)])
        with pytest.raises(DimensionMismatch):
            extensions(V, 1)


class TestGroupAction:

    @pytest.mark.parametrize("q,n,k", [(2, 4, 2), (3, 3, 1), (4, 3, 2)])
    def test_invertible_map_permutes(self, q, n, k):
        field = make_field(q)
        subspaces = enumerate_subspaces(n, k, field)
        L = random_invertible(field, n, seed=11)
        images = [apply_map(L, V) for V in subspaces]
        assert sorted(images) == subspaces

    def test_map_between_hits_target(self, f3):
        subspaces = enumerate_subspaces(3, 2, f3)
        for U1, U2 in zip(subspaces, reversed(subspaces)):
            assert apply_map(map_between(U1, U2), U1) == U2

    def test_singular_map_rejected(self, f2):
        L = MatrixGFq.from_rows(f2, [[1, 0], [1, 0]])
        with pytest.raises(SingularMap):
            apply_map(L, full_space(f2, 2))

    def test_dimensions_must_match(self, f2):
        with pytest.raises(DimensionMismatch):
            map_between(enumerate_subspaces(3, 1, f2)[0], enumerate_subspaces(3, 2, f2)[0])
