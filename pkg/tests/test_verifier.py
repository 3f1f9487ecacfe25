"""
Tests for design verification, block-count arithmetic and design files.
"""

import json

import pytest

from qdesigns.design_io import (
    format_design_json,
    format_design_text,
    load_design,
    parse_design_json,
    parse_design_text,
    save_design,
)
from qdesigns.error_handling import AmbientMismatch, DesignFormatError, DimensionMismatch
from qdesigns.services.gf_core import make_field, random_invertible
from qdesigns.services.grassmann import enumerate_subspaces
from qdesigns.services.qcount import q_binomial
from qdesigns.services.verifier import (
    DesignCandidate,
    Infeasible,
    block_count_for,
    lambda_identity_check,
    transform_design,
    trivial_design,
    union_designs,
    verify_design,
)

# Desarguesian spread of F_2^4: the five F_4-lines.
SPREAD_F2_4 = """2 4 2

1000
0100

0010
0001

1010
0101

1001
0111

1011
0110
"""


@pytest.fixture
def spread(f2):
    return parse_design_text(SPREAD_F2_4)


class TestTrivialDesigns:

    def test_trivial_f2_4(self, f2):
        report = verify_design(trivial_design(4, 2, f2), 1)
        assert report.is_design and report.lambda_ == 7
        assert report.block_count == 35
        assert report.is_simple and report.is_trivial
        assert report.counts_histogram == {7: 15}

    @pytest.mark.parametrize("q", [2, 3])
    def test_trivial_grid(self, q):
        field = make_field(q)
        for n in range(1, 5):
            for k in range(1, n + 1):
                design = trivial_design(n, k, field)
                for t in range(k + 1):
                    report = verify_design(design, t)
                    assert report.lambda_ == q_binomial(n - t, k - t, q)

    def test_drop_one_block(self, f2):
        blocks = trivial_design(4, 2, f2).blocks
        report = verify_design(DesignCandidate(f2, 4, 2, blocks[1:]), 1)
        assert not report.is_design
        assert report.lambda_ is None
        assert report.counts_histogram == {6: 3, 7: 12}
        assert report.failing_count == 6
        assert report.failing_t_subspace == ["1000"]

    def test_repeated_block_is_not_simple(self, f2):
        blocks = enumerate_subspaces(2, 1, f2)
        report = verify_design(DesignCandidate(f2, 2, 1, tuple(blocks) + (blocks[0],)), 0)
        assert report.is_design and report.lambda_ == 4
        assert not report.is_simple and not report.is_trivial


class TestSpread:

    def test_spread_is_1_design(self, spread):
        report = verify_design(spread, 1)
        assert report.is_design and report.lambda_ == 1
        assert report.is_simple and not report.is_trivial

    def test_union_with_complement(self, f2, spread):
        trivial = trivial_design(4, 2, f2)
        taken = set(spread.blocks)
        complement = DesignCandidate(f2, 4, 2, tuple(B for B in trivial.blocks if B not in taken))
        assert verify_design(complement, 1).lambda_ == 6
        joined = verify_design(union_designs(spread, complement), 1)
        assert joined.lambda_ == 7 and joined.is_simple

    @pytest.mark.parametrize("seed", range(4))
    def test_gl_image_keeps_lambda(self, f2, spread, seed):
        moved = transform_design(spread, random_invertible(f2, 4, seed))
        report = verify_design(moved, 1)
        assert report.is_design and report.lambda_ == 1 and report.is_simple

    def test_failing_histogram_has_zero_bucket(self, spread):
        report = verify_design(spread, 2)
        assert report.counts_histogram == {0: 30, 1: 5}
        assert report.failing_count == 1


class TestBlockCounts:

    def test_lambda_identity(self):
        assert lambda_identity_check(4, 2, 1, 2, 35) == 7
        assert lambda_identity_check(4, 2, 1, 2, 5) == 1
        assert isinstance(lambda_identity_check(5, 2, 1, 2, 10), Infeasible)

    def test_block_count_for(self):
        assert block_count_for(4, 2, 1, 2, 1) == 5
        assert block_count_for(6, 3, 1, 2, 1) == 9
        assert block_count_for(4, 2, 1, 2, 7) == 35
        assert isinstance(block_count_for(3, 2, 1, 2, 1), Infeasible)
        assert isinstance(block_count_for(5, 2, 1, 2, 1), Infeasible)

    def test_lambda_must_be_positive(self):
        with pytest.raises(DimensionMismatch):
            block_count_for(4, 2, 1, 2, 0)


class TestCandidates:

    def test_mixed_ambients_rejected(self, f2, f3):
        with pytest.raises(AmbientMismatch):
            DesignCandidate(f2, 3, 1, (enumerate_subspaces(3, 1, f3)[0],))
        with pytest.raises(DimensionMismatch):
            DesignCandidate(f2, 3, 1, (enumerate_subspaces(3, 2, f2)[0],))

    def test_union_checks_dimensions(self, f2):
        with pytest.raises(DimensionMismatch):
            union_designs(trivial_design(3, 1, f2), trivial_design(3, 2, f2))


class TestDesignFiles:

    def test_text_round_trip(self, spread):
        assert parse_design_text(format_design_text(spread)).blocks == spread.blocks

    def test_json_shape(self, spread):
        document = json.loads(format_design_json(spread))
        assert (document["q"], document["n"], document["k"]) == (2, 4, 2)
        assert document["blocks"][0] == ["1000", "0100"]
        assert parse_design_json(format_design_json(spread)).blocks == spread.blocks

    def test_blocks_are_canonicalized(self):
        design = parse_design_text("3 3 2\n\n120\n011\n")
        assert design.blocks[0].format_rows() == ["101", "011"]

    @pytest.mark.parametrize("text", [
        "",
        "2 3\n",
        "2 3 4\n",
        "2 3 2\n\n100\n",
        "2 3 2\n\n100\n0100\n",
        "2 3 2\n\n100\n020\n",
        "2 3 2\n\n110\n110\n",
    ])
    def test_malformed_text_rejected(self, text):
        with pytest.raises(DesignFormatError):
            parse_design_text(text)

    def test_bad_json_rejected(self):
        with pytest.raises(DesignFormatError):
            parse_design_json('{"q": 2, "n": 3}')

    def test_save_and_load(self, tmp_path, spread):
        save_design(spread, tmp_path / "spread.json", "json")
        save_design(spread, tmp_path / "spread.txt")
        assert load_design(tmp_path / "spread.json").blocks == spread.blocks
        assert load_design(tmp_path / "spread.txt").blocks == spread.blocks

    def test_missing_file_is_usage_error(self, tmp_path):
        with pytest.raises(DesignFormatError) as info:
            load_design(tmp_path / "absent.txt")
        assert info.value.exit_code == 2
