"""
Incidence structure between k-subspaces (rows) and t-subspaces (columns).

Each row is a Python int used as a bitset over column indices, so row
weights are popcounts and the whole matrix costs |A|*|B|/8 bytes.
"""

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from qdesigns.config import settings
from qdesigns.error_handling import (
    DimensionMismatch,
    InvariantViolation,
    ensure_memory_for,
    ensure_within_cap,
    require,
)
from qdesigns.logging_config import get_logger
from qdesigns.models import IncidenceSummary, fraction_text
from qdesigns.services.gf_core import FieldSpec
from qdesigns.services.grassmann import (
    SubspaceBasis,
    apply_map,
    enumerate_subspaces,
    index_by_key,
    map_between,
    subspaces_within,
)
from qdesigns.services.qcount import q_binomial
from qdesigns.workers.shard_pool import map_chunked

logger = get_logger("incidence")


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True, eq=False)
class IncidenceStructure:
    """M[b][a] = 1 iff column subspace a lies in row subspace b."""
    field: FieldSpec
    n: int
    k: int
    t: int
    row_index: Tuple[SubspaceBasis, ...]
    col_index: Tuple[SubspaceBasis, ...]
    bits: Tuple[int, ...]
    row_weight: int
    col_weight: int

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.row_index), len(self.col_index)

    def entry(self, b: int, a: int) -> int:
        return (self.bits[b] >> a) & 1

    def row_sums(self) -> List[int]:
        return [popcount(row) for row in self.bits]

    def col_sums(self) -> List[int]:
        sums = [0] * len(self.col_index)
        for row in self.bits:
            while row:
                low = row & -row
                sums[low.bit_length() - 1] += 1
                row ^= low
        return sums


def build_incidence(n: int, k: int, t: int, field: FieldSpec, workers: int = None) -> IncidenceStructure:
    """Build M with rows and columns in canonical subspace order."""
    if not 0 <= t <= k <= n:
        raise DimensionMismatch(f"need t <= k <= n, got n={n}, k={k}, t={t}")
    q = field.q
    rows_count = q_binomial(n, k, q)
    cols_count = q_binomial(n, t, q)
    ensure_within_cap("|A|*|B| incidence bits", rows_count * cols_count, settings.MAX_INCIDENCE_BITS)
    ensure_memory_for("incidence bitmap", rows_count * cols_count // 8)

    with logger.track_performance("build_incidence", n=n, k=k, t=t, q=q):
        row_index = enumerate_subspaces(n, k, field, workers)
        col_index = enumerate_subspaces(n, t, field, workers)
        column_of = index_by_key(col_index)

        def build_rows(chunk: Sequence[SubspaceBasis]) -> List[int]:
            out = []
            for U in chunk:
                row = 0
                for V in subspaces_within(U, t):
                    row |= 1 << column_of[V]
                out.append(row)
            return out

        bits = tuple(row for part in map_chunked(build_rows, row_index, workers) for row in part)

    row_weight = q_binomial(k, t, q)
    col_weight = q_binomial(n - t, k - t, q)
    M = IncidenceStructure(
        field=field, n=n, k=k, t=t,
        row_index=tuple(row_index), col_index=tuple(col_index),
        bits=bits, row_weight=row_weight, col_weight=col_weight,
    )
    # Entries are 0/1 by construction, so the boundedness parameter is 1.
    require(all(w == row_weight for w in M.row_sums()), f"row weight differs from [{k} {t}]_{q}")
    require(all(w == col_weight for w in M.col_sums()), f"column weight differs from [{n - t} {k - t}]_{q}")
    return M


def boundedness(M: IncidenceStructure) -> int:
    """Largest absolute entry; 1 for any nonempty incidence matrix."""
    return 1 if any(M.bits) else 0


def average_row(M: IncidenceStructure) -> Fraction:
    """Common value of every coordinate of the average row."""
    q, n, k, t = M.field.q, M.n, M.k, M.t
    via_columns = Fraction(q_binomial(k, t, q), q_binomial(n, t, q))
    via_rows = Fraction(q_binomial(n - t, k - t, q), q_binomial(n, k, q))
    require(via_columns == via_rows, f"average row forms disagree: {via_columns} != {via_rows}")
    observed = {Fraction(s, len(M.row_index)) for s in M.col_sums()}
    require(observed == {via_columns}, f"observed column averages {observed} != {via_columns}")
    return via_columns


def check_constant_vector_property(M: IncidenceStructure) -> bool:
    """Every row sums to [k t]_q, so the column sum is [k t]_q times all-ones."""
    expected = q_binomial(M.k, M.t, M.field.q)
    return all(w == expected for w in M.row_sums())


def check_double_counting(M: IncidenceStructure) -> bool:
    total = sum(M.row_sums())
    return total == len(M.row_index) * M.row_weight == len(M.col_index) * M.col_weight


def check_symmetry_transitivity(M: IncidenceStructure, trials: int, seed: int, samples: int = 1000) -> bool:
    """For random row pairs, build L in GL(n,q) taking one to the other and
    check that the induced row/column permutations preserve sampled entries."""
    rng = random.Random(seed)
    row_of: Dict[SubspaceBasis, int] = index_by_key(M.row_index)
    col_of: Dict[SubspaceBasis, int] = index_by_key(M.col_index)
    n_rows, n_cols = M.shape
    for trial in range(trials):
        b1, b2 = rng.randrange(n_rows), rng.randrange(n_rows)
        L = map_between(M.row_index[b1], M.row_index[b2])
        if apply_map(L, M.row_index[b1]) != M.row_index[b2]:
            logger.warning("transitivity_failed", trial=trial, b1=b1, b2=b2)
            return False
        for _ in range(samples):
            b, a = rng.randrange(n_rows), rng.randrange(n_cols)
            pi_b = row_of[apply_map(L, M.row_index[b], check=False)]
            sigma_a = col_of[apply_map(L, M.col_index[a], check=False)]
            if M.entry(pi_b, sigma_a) != M.entry(b, a):
                logger.warning("entry_not_preserved", trial=trial, b=b, a=a)
                return False
    return True


def to_bitmap_text(M: IncidenceStructure) -> str:
    """Plain PBM ("P1") text: width = |A| columns, height = |B| rows."""
    n_rows, n_cols = M.shape
    lines = ["P1", f"{n_cols} {n_rows}"]
    for row in M.bits:
        lines.append("".join("1" if (row >> a) & 1 else "0" for a in range(n_cols)))
    return "\n".join(lines) + "\n"


def summarize(M: IncidenceStructure, symmetry_trials: int = 0, seed: int = 0) -> IncidenceSummary:
    n_rows, n_cols = M.shape
    try:
        avg = fraction_text(average_row(M))
    except InvariantViolation as e:
        logger.error("average_row_failed", error=e)
        avg = "inconsistent"
    return IncidenceSummary(
        q=M.field.q, n=M.n, k=M.k, t=M.t,
        rows=n_rows, columns=n_cols,
        row_weight=M.row_weight, col_weight=M.col_weight,
        c2=boundedness(M),
        average_row=avg,
        constant_vector=check_constant_vector_property(M),
        double_counting=check_double_counting(M),
        symmetry_trials=symmetry_trials,
        symmetry_ok=check_symmetry_transitivity(M, symmetry_trials, seed) if symmetry_trials else None,
    )
