"""
Design verification: does a block collection cover every t-subspace
exactly lambda times?

Coverage is counted from the blocks' own t-subspaces, so the incidence
matrix is never materialized.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

from qdesigns.config import settings
from qdesigns.error_handling import (
    AmbientMismatch,
    DimensionMismatch,
    ensure_within_cap,
    require,
)
from qdesigns.logging_config import get_logger
from qdesigns.models import VerificationReport
from qdesigns.services.gf_core import FieldSpec, MatrixGFq
from qdesigns.services.grassmann import (
    SubspaceBasis,
    apply_map,
    enumerate_subspaces,
    subspaces_within,
)
from qdesigns.services.qcount import q_binomial
from qdesigns.workers.shard_pool import map_chunked

logger = get_logger("verifier")


@dataclass(frozen=True)
class Infeasible:
    """Parameters for which no design can exist; returned, never raised."""
    reason: str


@dataclass(frozen=True)
class DesignCandidate:
    field: FieldSpec
    n: int
    k: int
    blocks: Tuple[SubspaceBasis, ...]

    def __post_init__(self):
        for block in self.blocks:
            if block.field != self.field or block.n != self.n:
                raise AmbientMismatch(
                    f"block in F_{block.field.q}^{block.n} inside a design over F_{self.field.q}^{self.n}"
                )
            if block.k != self.k:
                raise DimensionMismatch(f"block of dimension {block.k} in a design of {self.k}-subspaces")

    @property
    def size(self) -> int:
        return len(self.blocks)


def lambda_identity_check(n: int, k: int, t: int, q: int, N: int) -> Union[int, Infeasible]:
    """lambda = N [k t]_q / [n t]_q when that division is exact."""
    if not 0 <= t <= k <= n:
        raise DimensionMismatch(f"need t <= k <= n, got n={n}, k={k}, t={t}")
    lam, remainder = divmod(N * q_binomial(k, t, q), q_binomial(n, t, q))
    if remainder:
        return Infeasible(f"{N}*[{k} {t}]_{q} is not divisible by [{n} {t}]_{q}")
    return lam


def block_count_for(n: int, k: int, t: int, q: int, lam: int) -> Union[int, Infeasible]:
    """Number of blocks N of a t-(n,k,lam) design, or Infeasible.

    A t-design is also an i-design for every i <= t, with
    lam_i = lam [n-i t-i]_q / [k-i t-i]_q, and each lam_i must be an integer.
    N is lam_0.
    """
    if not 0 <= t <= k <= n:
        raise DimensionMismatch(f"need t <= k <= n, got n={n}, k={k}, t={t}")
    if lam < 1:
        raise DimensionMismatch("lambda must be positive")
    lam_i = lam
    for i in range(t, -1, -1):
        value, remainder = divmod(lam * q_binomial(n - i, t - i, q), q_binomial(k - i, t - i, q))
        if remainder:
            return Infeasible(f"lambda_{i} = {lam}*[{n - i} {t - i}]_{q}/[{k - i} {t - i}]_{q} is not an integer")
        lam_i = value
    return lam_i


def _coverage(blocks: Sequence[SubspaceBasis], t: int, workers: int = None) -> Counter:
    def count_chunk(chunk: Sequence[SubspaceBasis]) -> Counter:
        counts: Counter = Counter()
        for block in chunk:
            counts.update(subspaces_within(block, t))
        return counts

    total: Counter = Counter()
    for part in map_chunked(count_chunk, blocks, workers):
        total.update(part)
    return total


def verify_design(candidate: DesignCandidate, t: int, workers: int = None) -> VerificationReport:
    n, k, q = candidate.n, candidate.k, candidate.field.q
    if not 0 <= t <= k:
        raise DimensionMismatch(f"need 0 <= t <= k = {k}, got t = {t}")
    universe = q_binomial(n, t, q)
    ensure_within_cap(f"[{n} {t}]_{q} columns", universe, settings.MAX_VERIFY_COLUMNS)

    with logger.track_performance("verify_design", n=n, k=k, t=t, q=q, blocks=candidate.size):
        coverage = _coverage(candidate.blocks, t, workers)

    histogram: Dict[int, int] = Counter(coverage.values())
    uncovered = universe - len(coverage)
    if uncovered:
        histogram[0] += uncovered
    histogram = dict(sorted(histogram.items()))

    distinct = len(set(candidate.blocks))
    is_simple = distinct == candidate.size
    is_trivial = is_simple and distinct == q_binomial(n, k, q)
    is_design = len(histogram) == 1

    report = VerificationReport(
        is_design=is_design,
        t=t,
        block_count=candidate.size,
        is_simple=is_simple,
        is_trivial=is_trivial,
        counts_histogram=histogram,
    )
    if is_design:
        lam = next(iter(histogram))
        require(
            lam * universe == candidate.size * q_binomial(k, t, q),
            f"lambda*[{n} {t}]_{q} != N*[{k} {t}]_{q} for lambda={lam}, N={candidate.size}",
        )
        report.lambda_ = lam
    else:
        # Most common count wins; ties go to the larger count.
        expected = max(histogram, key=lambda c: (histogram[c], c))
        for S in enumerate_subspaces(n, t, candidate.field, workers):
            if coverage.get(S, 0) != expected:
                report.failing_t_subspace = S.format_rows()
                report.failing_count = coverage.get(S, 0)
                break
        logger.info("design_check_failed", t=t, histogram=histogram, failing_count=report.failing_count)
    return report


def union_designs(first: DesignCandidate, second: DesignCandidate) -> DesignCandidate:
    if first.field != second.field or first.n != second.n:
        raise AmbientMismatch("designs live in different ambient spaces")
    if first.k != second.k:
        raise DimensionMismatch(f"cannot join designs of {first.k}- and {second.k}-subspaces")
    return DesignCandidate(first.field, first.n, first.k, first.blocks + second.blocks)


def transform_design(candidate: DesignCandidate, L: MatrixGFq) -> DesignCandidate:
    """Image of every block under an invertible map."""
    blocks = [apply_map(L, candidate.blocks[0])] if candidate.blocks else []
    blocks += [apply_map(L, block, check=False) for block in candidate.blocks[1:]]
    return DesignCandidate(candidate.field, candidate.n, candidate.k, tuple(blocks))


def trivial_design(n: int, k: int, field: FieldSpec, workers: int = None) -> DesignCandidate:
    return DesignCandidate(field, n, k, tuple(enumerate_subspaces(n, k, field, workers)))