"""
Tests for settings overrides, resource guards and the shard pool.
"""

import pytest

from qdesigns.config import get_workers, override_settings, settings
from qdesigns.error_handling import TooLarge, TooManyTerms, ensure_within_cap
from qdesigns.workers.shard_pool import map_chunked, map_processes, map_shards, split_evenly


class TestSettings:

    def test_override_restores(self):
        before = settings.MAX_ENUMERATION
        with override_settings(MAX_ENUMERATION=5, MAX_SUM_TERMS=None):
            assert settings.MAX_ENUMERATION == 5
        assert settings.MAX_ENUMERATION == before

    def test_override_restores_after_error(self):
        before = settings.MAX_INCIDENCE_BITS
        with pytest.raises(RuntimeError):
            with override_settings(MAX_INCIDENCE_BITS=1):
                raise RuntimeError("boom")
        assert settings.MAX_INCIDENCE_BITS == before

    def test_unknown_setting(self):
        with pytest.raises(AttributeError):
            with override_settings(NOT_A_SETTING=1):
                pass

    def test_workers(self):
        assert get_workers(3) == 3
        assert get_workers(0) == 1
        with override_settings(WORKERS=6):
            assert get_workers() == 6


class TestGuards:

    def test_within_cap(self):
        ensure_within_cap("rows", 10, 10)
        with pytest.raises(TooLarge) as info:
            ensure_within_cap("rows", 11, 10)
        assert (info.value.value, info.value.cap, info.value.exit_code) == (11, 10, 3)

    def test_custom_error_type(self):
        with pytest.raises(TooManyTerms):
            ensure_within_cap("terms", 2, 1, TooManyTerms)


class TestShardPool:

    def test_split_evenly(self):
        assert split_evenly(list(range(7)), 3) == [[0, 1, 2], [3, 4], [5, 6]]
        assert split_evenly([1, 2], 5) == [[1], [2]]
        assert split_evenly([], 4) == [[]]

    @pytest.mark.parametrize("workers", [1, 2, 5])
    def test_results_in_shard_order(self, workers):
        assert map_shards(lambda x: x * x, range(10), workers) == [x * x for x in range(10)]
        chunks = map_chunked(sum, list(range(100)), workers)
        assert len(chunks) == workers
        assert sum(chunks) == 4950

    def test_empty_input(self):
        assert map_chunked(sum, [], 4) == []

    def test_processes_keep_shard_order(self):
        shards = [-5, 4, -3, 2, -1]
        assert map_processes(abs, shards, 2) == [5, 4, 3, 2, 1]
        assert map_processes(abs, shards, 1) == [5, 4, 3, 2, 1]
