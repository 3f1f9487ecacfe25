"""
Subspaces of F_q^n in canonical reduced row echelon form.

Canonical order: pivot-column sets in lexicographic order, then the
non-pivot entries (row-major) read as a base-q number whose least
significant digit is the last free position.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations, product
from typing import Dict, Iterable, List, Sequence, Tuple

from qdesigns.config import settings
from qdesigns.error_handling import (
    AmbientMismatch,
    DimensionMismatch,
    SingularMap,
    ensure_within_cap,
    require,
)
from qdesigns.logging_config import get_logger
from qdesigns.services.gf_core import (
    FieldSpec,
    MatrixGFq,
    invert,
    make_field,
    mat_vec,
    matmul,
    rref_rows,
    reduce_vector,
    transpose,
)
from qdesigns.services.qcount import q_binomial
from qdesigns.workers.shard_pool import map_shards

logger = get_logger("grassmann")

Row = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """A k-subspace of F_q^n held as its RREF basis (no zero rows)."""
    field: FieldSpec
    n: int
    k: int
    rows: Tuple[Row, ...]
    pivots: Tuple[int, ...]

    @property
    def identity_key(self) -> Tuple[int, int, Tuple[Row, ...]]:
        return (self.field.q, self.n, self.rows)

    def __eq__(self, other) -> bool:
        return isinstance(other, SubspaceBasis) and self.identity_key == other.identity_key

    def __hash__(self) -> int:
        return hash(self.identity_key)

    @cached_property
    def sort_key(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        pivot_set = set(self.pivots)
        free = tuple(row[c] for row in self.rows for c in range(self.n) if c not in pivot_set)
        return (self.pivots, free)

    def __lt__(self, other: "SubspaceBasis") -> bool:
        return self.sort_key < other.sort_key

    @property
    def basis(self) -> MatrixGFq:
        return MatrixGFq.from_rows(self.field, self.rows, self.n)

    @cached_property
    def span_mask(self) -> int:
        """Bitmask over all q^n vectors (base-q index) of the vectors in the span."""
        return span_mask(self)

    def format_rows(self) -> List[str]:
        return format_subspace(self)

    def __repr__(self) -> str:
        return f"SubspaceBasis(q={self.field.q}, n={self.n}, k={self.k}, rows={self.format_rows()})"


def vector_index(vector: Sequence[int], q: int) -> int:
    index = 0
    for x in vector:
        index = index * q + x
    return index


def span_mask(V: SubspaceBasis) -> int:
    """Explicitly enumerate the q^k vectors of V into a bitmask."""
    q = V.field.q
    ensure_within_cap(f"{q}^{V.n} ambient vectors", q ** V.n, settings.MAX_ENUMERATION)
    add, mul = V.field.add_table, V.field.mul_table
    vectors = {tuple([0] * V.n)}
    for row in V.rows:
        vectors = {
            tuple(add[x][mul[c][y]] for x, y in zip(v, row))
            for v in vectors
            for c in range(q)
        }
    mask = 0
    for v in vectors:
        mask |= 1 << vector_index(v, q)
    return mask


def subspace_from_rows(field: FieldSpec, n: int, rows: Iterable[Sequence[int]]) -> SubspaceBasis:
    """Canonical subspace spanned by arbitrary (possibly dependent) rows."""
    rows = [tuple(r) for r in rows]
    if any(len(r) != n for r in rows):
        raise DimensionMismatch(f"vectors must have length {n}")
    reduced, pivots = rref_rows(field, rows, n)
    k = len(pivots)
    return SubspaceBasis(field, n, k, tuple(tuple(r) for r in reduced[:k]), tuple(pivots))


def full_space(field: FieldSpec, n: int) -> SubspaceBasis:
    return SubspaceBasis(
        field, n, n,
        tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)),
        tuple(range(n)),
    )


def _subspaces_with_pivots(field: FieldSpec, n: int, pivots: Tuple[int, ...]) -> List[SubspaceBasis]:
    k = len(pivots)
    pivot_set = set(pivots)
    free_positions = [(i, c) for i in range(k) for c in range(pivots[i] + 1, n) if c not in pivot_set]
    out = []
    for values in product(range(field.q), repeat=len(free_positions)):
        rows = [[0] * n for _ in range(k)]
        for i, c in enumerate(pivots):
            rows[i][c] = 1
        for (i, c), x in zip(free_positions, values):
            rows[i][c] = x
        out.append(SubspaceBasis(field, n, k, tuple(tuple(r) for r in rows), pivots))
    return out


def enumerate_subspaces(n: int, k: int, field: FieldSpec, workers: int = None) -> List[SubspaceBasis]:
    """All k-subspaces of F_q^n in canonical order."""
    if not 0 <= k <= n:
        raise DimensionMismatch(f"need 0 <= k <= n, got n={n}, k={k}")
    count = q_binomial(n, k, field.q)
    ensure_within_cap(f"[{n} {k}]_{field.q}", count, settings.MAX_ENUMERATION)
    shards = list(combinations(range(n), k))
    with logger.track_performance("enumerate_subspaces", n=n, k=k, q=field.q, count=count):
        parts = map_shards(lambda pivots: _subspaces_with_pivots(field, n, pivots), shards, workers)
    result = [V for part in parts for V in part]
    require(len(result) == count, f"enumerated {len(result)} subspaces, expected {count}")
    return result


@lru_cache(maxsize=128)
def _grassmannian(n: int, k: int, q: int) -> Tuple[SubspaceBasis, ...]:
    """Cached enumeration for the small coordinate spaces used inside loops."""
    return tuple(enumerate_subspaces(n, k, make_field(q), workers=1))


def _check_ambient(U: SubspaceBasis, V: SubspaceBasis) -> None:
    if U.field.q != V.field.q or U.n != V.n:
        raise AmbientMismatch(
            f"subspaces of F_{U.field.q}^{U.n} and F_{V.field.q}^{V.n} are not comparable"
        )


def contains(U: SubspaceBasis, V: SubspaceBasis) -> bool:
    """V is a subspace of U."""
    _check_ambient(U, V)
    if V.k > U.k:
        return False
    return all(not any(reduce_vector(U.field, U.rows, U.pivots, row)) for row in V.rows)


def stacked_rank(U: SubspaceBasis, V: SubspaceBasis) -> int:
    _check_ambient(U, V)
    _, pivots = rref_rows(U.field, list(U.rows) + list(V.rows), U.n)
    return len(pivots)


def intersect_dim(U: SubspaceBasis, V: SubspaceBasis) -> int:
    """dim(U ∩ V) = dim U + dim V - dim(U + V)."""
    return U.k + V.k - stacked_rank(U, V)


def sum_space(U: SubspaceBasis, V: SubspaceBasis) -> SubspaceBasis:
    _check_ambient(U, V)
    return subspace_from_rows(U.field, U.n, list(U.rows) + list(V.rows))


def mask_dim(mask: int, q: int) -> int:
    """Dimension of a subspace given its vector bitmask."""
    size = bin(mask).count("1")
    dim = 0
    while q ** dim < size:
        dim += 1
    require(q ** dim == size, f"{size} vectors is not a power of {q}")
    return dim


def extensions(V: SubspaceBasis, k: int) -> List[SubspaceBasis]:
    """All k-subspaces containing V, in canonical order.

    They correspond to the (k - dim V)-subspaces of the quotient, whose
    coordinates are the non-pivot columns of V.
    """
    if not V.k <= k <= V.n:
        raise DimensionMismatch(f"need dim V = {V.k} <= k = {k} <= n = {V.n}")
    field, n = V.field, V.n
    free_cols = [c for c in range(n) if c not in set(V.pivots)]
    count = q_binomial(n - V.k, k - V.k, field.q)
    ensure_within_cap(f"[{n - V.k} {k - V.k}]_{field.q}", count, settings.MAX_ENUMERATION)
    result = []
    for W in _grassmannian(n - V.k, k - V.k, field.q):
        lifted = []
        for row in W.rows:
            vector = [0] * n
            for c, x in zip(free_cols, row):
                vector[c] = x
            lifted.append(vector)
        result.append(subspace_from_rows(field, n, list(V.rows) + lifted))
    result.sort(key=lambda U: U.sort_key)
    return result


def subspaces_within(U: SubspaceBasis, j: int) -> List[SubspaceBasis]:
    """All j-subspaces of U, in canonical order of F_q^n."""
    if not 0 <= j <= U.k:
        raise DimensionMismatch(f"need 0 <= j <= dim U = {U.k}, got {j}")
    field, n = U.field, U.n
    add, mul = field.add_table, field.mul_table
    out = []
    for C in _grassmannian(U.k, j, field.q):
        images = []
        for coeffs in C.rows:
            vector = [0] * n
            for c, row in zip(coeffs, U.rows):
                if c:
                    vector = [add[x][mul[c][y]] for x, y in zip(vector, row)]
            images.append(vector)
        out.append(subspace_from_rows(field, n, images))
    out.sort(key=lambda S: S.sort_key)
    return out


def complete_basis(U: SubspaceBasis) -> List[Row]:
    """U's basis followed by unit vectors on its non-pivot columns: a basis of F_q^n."""
    pivot_set = set(U.pivots)
    units = [tuple(1 if i == c else 0 for i in range(U.n)) for c in range(U.n) if c not in pivot_set]
    return list(U.rows) + units


def _check_invertible(L: MatrixGFq, n: int) -> None:
    if L.rows != n or L.cols != n:
        raise DimensionMismatch(f"map must be {n}x{n}, got {L.rows}x{L.cols}")
    _, pivots = rref_rows(L.field, L.to_rows(), n)
    if len(pivots) != n:
        raise SingularMap(f"{n}x{n} map has rank {len(pivots)}")


def apply_map(L: MatrixGFq, V: SubspaceBasis, check: bool = True) -> SubspaceBasis:
    """L(V) = span{L v : v in basis of V}, with L acting on column vectors."""
    if check:
        _check_invertible(L, V.n)
    if L.field.q != V.field.q:
        raise AmbientMismatch("map and subspace are over different fields")
    return subspace_from_rows(V.field, V.n, [mat_vec(L, row) for row in V.rows])


def map_between(U1: SubspaceBasis, U2: SubspaceBasis) -> MatrixGFq:
    """An invertible L with L(U1) = U2, built by extending both bases."""
    _check_ambient(U1, U2)
    if U1.k != U2.k:
        raise DimensionMismatch(f"no invertible map takes a {U1.k}-subspace to a {U2.k}-subspace")
    field, n = U1.field, U1.n
    P1 = transpose(MatrixGFq.from_rows(field, complete_basis(U1), n))
    P2 = transpose(MatrixGFq.from_rows(field, complete_basis(U2), n))
    return matmul(P2, invert(P1))


def format_subspace(V: SubspaceBasis) -> List[str]:
    fmt = V.field.format_element
    return ["".join(fmt(x) for x in row) for row in V.rows]


def parse_rows(field: FieldSpec, lines: Sequence[str]) -> List[Row]:
    return [tuple(field.parse_element(ch) for ch in line.strip()) for line in lines]


def index_by_key(subspaces: Sequence[SubspaceBasis]) -> Dict[SubspaceBasis, int]:
    return {V: i for i, V in enumerate(subspaces)}
