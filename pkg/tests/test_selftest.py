"""
Tests for the invariant suites behind `qdesigns selftest`.
"""

import pytest

from qdesigns.error_handling import InvariantSuite, UsageError
from qdesigns.selftest import SUITES, build_suite, run_selftest

FAST = ["field_axioms", "rref_properties", "qbinom_symmetry", "qbinom_bounds", "decode_system", "c3", "klp"]


class TestInvariantSuite:

    def test_failures_are_isolated(self):
        suite = InvariantSuite()
        suite.add_check("ok", lambda: 3)
        suite.add_check("broken", lambda: 1 // 0)
        suite.add_check("after", lambda: 2)
        outcomes = suite.run_checks()
        assert [(o.name, o.passed, o.cases) for o in outcomes] == [("ok", True, 3), ("broken", False, 0), ("after", True, 2)]
        assert outcomes[1].detail

    def test_only_filters(self):
        suite = InvariantSuite()
        suite.add_check("a", lambda: 1)
        suite.add_check("b", lambda: 1)
        assert [o.name for o in suite.run_checks(["b"])] == ["b"]


class TestSelftest:

    def test_suite_names_are_unique(self):
        names = [name for name, _ in SUITES]
        assert len(names) == len(set(names))
        assert build_suite().names() == names

    def test_fast_subset_passes(self):
        report = run_selftest(only=FAST)
        assert report.passed
        assert [s.name for s in report.suites] == FAST
        assert all(s.cases > 0 and s.detail == "" for s in report.suites)

    def test_decode_system_case_count(self):
        (suite,) = run_selftest(only=["decode_system"]).suites
        assert suite.cases == 25

    def test_worker_count_does_not_change_results(self):
        one = run_selftest(workers=1, only=["incidence_properties", "certificates"])
        four = run_selftest(workers=4, only=["incidence_properties", "certificates"])
        assert one.model_dump() == four.model_dump()
        assert one.passed

    def test_unknown_suite(self):
        with pytest.raises(UsageError):
            run_selftest(only=["field_axioms", "nope"])

    @pytest.mark.slow
    def test_everything_passes(self):
        report = run_selftest(workers=2)
        failed = [(s.name, s.detail) for s in report.suites if not s.passed]
        assert failed == []
        assert len(report.suites) == len(SUITES)
