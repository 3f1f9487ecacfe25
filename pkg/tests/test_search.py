"""
Tests for design search: the multi-cover solver, greedy search and the
arithmetic pre-checks.
"""

import time
from itertools import combinations

import pytest

from qdesigns.config import override_settings
from qdesigns.error_handling import DimensionMismatch, SearchTimeout, TooLarge
from qdesigns.services.search import (
    CoverInstance,
    MultiCoverSolver,
    NotFound,
    build_cover_instance,
    search_design,
)
from qdesigns.services.verifier import DesignCandidate, verify_design


def pair_instance(size: int, lam: int) -> CoverInstance:
    pairs = tuple(combinations(range(size), 2))
    return CoverInstance(tuple(range(size)), pairs, pairs, lam)


class TestMultiCoverSolver:

    def test_perfect_matching(self):
        assert MultiCoverSolver(pair_instance(4, 1)).solve() == [0, 5]

    def test_multiplicity_two(self):
        assert MultiCoverSolver(pair_instance(3, 2)).solve() == [0, 1, 2]

    def test_odd_universe_has_no_cover(self):
        solver = MultiCoverSolver(pair_instance(5, 1))
        assert solver.solve() is None
        assert solver.nodes > 0

    def test_state_is_restored_after_failure(self):
        solver = MultiCoverSolver(pair_instance(7, 1))
        assert solver.solve() is None
        assert solver.remaining == [1] * 7
        assert solver.blocked == [0] * len(solver.covers)
        assert solver.selection == []

    def test_past_deadline_times_out(self):
        solver = MultiCoverSolver(pair_instance(21, 1), deadline=time.monotonic() - 1)
        with pytest.raises(SearchTimeout) as info:
            solver.solve()
        assert info.value.exit_code == 3
        assert info.value.stats()["universe_size"] == 21
        assert info.value.nodes >= 256


class TestCoverInstance:

    def test_spread_instance(self, f2):
        instance = build_cover_instance(4, 2, 1, f2, 1)
        assert len(instance.universe) == 15
        assert len(instance.candidates) == 35
        assert all(len(cover) == 3 for cover in instance.covers)
        assert all(len(owners) == 7 for owners in instance.containing)


class TestSearchDesign:

    def test_spread_exhaustive(self):
        design = search_design(2, 4, 2, 1, 1)
        assert isinstance(design, DesignCandidate)
        assert len(design.blocks) == 5
        report = verify_design(design, 1)
        assert report.is_design and report.lambda_ == 1 and report.is_simple

    def test_exhaustive_is_deterministic(self):
        assert search_design(2, 4, 2, 1, 1).blocks == search_design(2, 4, 2, 1, 1, workers=3).blocks

    @pytest.mark.slow
    def test_plane_spread_of_f2_6(self):
        design = search_design(2, 6, 3, 1, 1, limit=0)
        assert isinstance(design, DesignCandidate)
        report = verify_design(design, 1)
        assert len(design.blocks) == 9
        assert report.is_design and report.is_simple and not report.is_trivial

    def test_t_equal_k_takes_every_block(self):
        """With t = k each block covers only itself."""
        design = search_design(2, 3, 2, 2, 1)
        assert isinstance(design, DesignCandidate)
        assert len(design.blocks) == 7

    def test_greedy_finds_trivial_design(self):
        design = search_design(2, 4, 2, 1, 7, method="greedy", seed=4)
        assert isinstance(design, DesignCandidate)
        assert len(design.blocks) == 35

    def test_greedy_spread(self):
        design = search_design(2, 4, 2, 1, 1, method="greedy", seed=1)
        assert isinstance(design, DesignCandidate)
        assert verify_design(design, 1).lambda_ == 1

    def test_divisibility_rules_out(self):
        result = search_design(2, 3, 2, 1, 1)
        assert isinstance(result, NotFound)
        assert "not an integer" in result.reason

    def test_too_many_blocks_for_a_simple_design(self):
        result = search_design(2, 4, 2, 1, 8)
        assert isinstance(result, NotFound)
        assert "at most" in result.reason

    def test_caps(self):
        with override_settings(MAX_SEARCH_COLUMNS=10):
            with pytest.raises(TooLarge):
                search_design(2, 4, 2, 1, 1)

    def test_bad_method(self):
        with pytest.raises(DimensionMismatch):
            search_design(2, 4, 2, 1, 1, method="annealing")
