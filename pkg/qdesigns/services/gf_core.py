"""
Finite field arithmetic and exact linear algebra over F_q.

Elements of F_q are the integers 0..q-1. For q = p^e with e > 1 the base-p
digits of an element are the coefficients of a polynomial in x (least
significant digit = constant term), reduced modulo a fixed irreducible
polynomial. Every table is precomputed once per order and cached.
"""

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from sympy import factorint

from qdesigns.error_handling import DimensionMismatch, SingularMap, UnsupportedOrder, require

SUPPORTED_ORDERS = (2, 3, 4, 5, 7, 8, 9, 11, 13, 16)

# Conway polynomials, coefficients from the constant term upwards.
REDUCTION_POLYNOMIALS = {
    (2, 2): (1, 1, 1),        # x^2 + x + 1
    (2, 3): (1, 1, 0, 1),     # x^3 + x + 1
    (2, 4): (1, 1, 0, 0, 1),  # x^4 + x + 1
    (3, 2): (2, 2, 1),        # x^2 + 2x + 2
}

DIGITS = "0123456789abcdef"


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """The finite field F_q with full operation tables.

    Fields with the same order are interchangeable, so identity is the order.
    """
    q: int
    characteristic: int
    degree: int
    reduction_polynomial: Optional[Tuple[int, ...]]
    add_table: Tuple[Tuple[int, ...], ...]
    mul_table: Tuple[Tuple[int, ...], ...]
    neg_table: Tuple[int, ...]
    inv_table: Tuple[int, ...]

    def __repr__(self) -> str:
        return f"FieldSpec(q={self.q})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldSpec) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("FieldSpec", self.q))

    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def sub(self, a: int, b: int) -> int:
        return self.add_table[a][self.neg_table[b]]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.inv_table[a]

    def format_element(self, a: int) -> str:
        return DIGITS[a]

    def parse_element(self, ch: str) -> int:
        value = DIGITS.find(ch.lower())
        if value < 0 or value >= self.q:
            raise ValueError(f"'{ch}' is not an element of F_{self.q}")
        return value


def _digits(a: int, p: int, e: int) -> List[int]:
    out = []
    for _ in range(e):
        out.append(a % p)
        a //= p
    return out


def _undigits(coeffs: Sequence[int], p: int) -> int:
    value = 0
    for c in reversed(coeffs):
        value = value * p + c
    return value


def _poly_mulmod(a: List[int], b: List[int], modulus: Tuple[int, ...], p: int) -> List[int]:
    e = len(modulus) - 1
    product = [0] * (2 * e - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                product[i + j] = (product[i + j] + ai * bj) % p
    # modulus is monic
    for deg in range(len(product) - 1, e - 1, -1):
        coeff = product[deg]
        if coeff:
            for i, mi in enumerate(modulus):
                product[deg - e + i] = (product[deg - e + i] - coeff * mi) % p
    return product[:e]


@lru_cache(maxsize=None)
def make_field(q: int) -> FieldSpec:
    """Build F_q for q in SUPPORTED_ORDERS."""
    if not isinstance(q, int) or q < 2:
        raise UnsupportedOrder(f"field order {q!r} is not supported")
    factors = factorint(q)
    if len(factors) != 1 or q not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(
            f"field order {q} is not supported (choose one of {', '.join(map(str, SUPPORTED_ORDERS))})"
        )
    (p, e), = factors.items()
    p, e = int(p), int(e)

    if e == 1:
        add = tuple(tuple((a + b) % p for b in range(q)) for a in range(q))
        mul = tuple(tuple((a * b) % p for b in range(q)) for a in range(q))
        modulus = None
    else:
        modulus = REDUCTION_POLYNOMIALS[(p, e)]
        digits = [_digits(a, p, e) for a in range(q)]
        add = tuple(
            tuple(_undigits([(x + y) % p for x, y in zip(digits[a], digits[b])], p) for b in range(q))
            for a in range(q)
        )
        mul = tuple(
            tuple(_undigits(_poly_mulmod(digits[a], digits[b], modulus, p), p) for b in range(q))
            for a in range(q)
        )

    neg = tuple(next(b for b in range(q) if add[a][b] == 0) for a in range(q))
    inv = tuple([0] + [next(b for b in range(1, q) if mul[a][b] == 1) for a in range(1, q)])
    return FieldSpec(
        q=q,
        characteristic=p,
        degree=e,
        reduction_polynomial=modulus,
        add_table=add,
        mul_table=mul,
        neg_table=neg,
        inv_table=inv,
    )


def check_field_axioms(field: FieldSpec) -> int:
    """Exhaustively check the field axioms on the tables; returns cases checked."""
    q = field.q
    add, mul = field.add_table, field.mul_table
    cases = 0
    for a in range(q):
        require(add[a][0] == a and mul[a][1] == a, f"identity fails at {a}")
        require(add[a][field.neg_table[a]] == 0, f"negation fails at {a}")
        if a:
            require(mul[a][field.inv_table[a]] == 1, f"inverse fails at {a}")
        for b in range(q):
            require(add[a][b] == add[b][a], f"additive commutativity fails at {a},{b}")
            require(mul[a][b] == mul[b][a], f"multiplicative commutativity fails at {a},{b}")
            for c in range(q):
                require(add[add[a][b]][c] == add[a][add[b][c]], "additive associativity")
                require(mul[mul[a][b]][c] == mul[a][mul[b][c]], "multiplicative associativity")
                require(mul[a][add[b][c]] == add[mul[a][b]][mul[a][c]], "distributivity")
                cases += 1
    return cases


@dataclass(frozen=True)
class MatrixGFq:
    """Dense row-major matrix over F_q."""
    field: FieldSpec
    rows: int
    cols: int
    entries: Tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatch(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )
        if any(not 0 <= x < self.field.q for x in self.entries):
            raise ValueError(f"entry outside F_{self.field.q}")

    @classmethod
    def from_rows(cls, field: FieldSpec, rows: Sequence[Sequence[int]], cols: int = None) -> "MatrixGFq":
        rows = [tuple(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise DimensionMismatch("ragged rows")
        return cls(field, len(rows), cols, tuple(x for r in rows for x in r))

    def row(self, i: int) -> Tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> List[Tuple[int, ...]]:
        return [self.row(i) for i in range(self.rows)]

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.entries[i * self.cols + j]


def identity(field: FieldSpec, n: int) -> MatrixGFq:
    return MatrixGFq.from_rows(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)], n)


def rref_rows(field: FieldSpec, rows: Sequence[Sequence[int]], cols: int) -> Tuple[List[List[int]], List[int]]:
    """Row-reduce a list of rows; returns (reduced rows incl. zero rows, pivot columns)."""
    mat = [list(r) for r in rows]
    add, mul, neg, inv = field.add_table, field.mul_table, field.neg_table, field.inv_table
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == len(mat):
            break
        pivot = next((i for i in range(r, len(mat)) if mat[i][c]), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        scale = inv[mat[r][c]]
        if scale != 1:
            mat[r] = [mul[scale][x] for x in mat[r]]
        prow = mat[r]
        for i in range(len(mat)):
            if i != r and mat[i][c]:
                factor = neg[mat[i][c]]
                mrow = mul[factor]
                mat[i] = [add[x][mrow[y]] for x, y in zip(mat[i], prow)]
        pivots.append(c)
        r += 1
    return mat, pivots


def rref(M: MatrixGFq) -> Tuple[MatrixGFq, int]:
    """Reduced row echelon form and rank; zero rows trail."""
    reduced, pivots = rref_rows(M.field, M.to_rows(), M.cols)
    return MatrixGFq.from_rows(M.field, reduced, M.cols) if M.rows else M, len(pivots)


def rank(M: MatrixGFq) -> int:
    return rref(M)[1]


def reduce_vector(field: FieldSpec, basis: Sequence[Sequence[int]], pivots: Sequence[int],
                  vector: Sequence[int]) -> List[int]:
    """Reduce a vector against an RREF basis; zero result iff it lies in the span."""
    add, mul, neg = field.add_table, field.mul_table, field.neg_table
    v = list(vector)
    for row, c in zip(basis, pivots):
        if v[c]:
            mrow = mul[neg[v[c]]]
            v = [add[x][mrow[y]] for x, y in zip(v, row)]
    return v


def matmul(A: MatrixGFq, B: MatrixGFq) -> MatrixGFq:
    if A.cols != B.rows:
        raise DimensionMismatch(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    field = A.field
    add, mul = field.add_table, field.mul_table
    out = []
    for i in range(A.rows):
        arow = A.row(i)
        for j in range(B.cols):
            acc = 0
            for k in range(A.cols):
                acc = add[acc][mul[arow[k]][B.entries[k * B.cols + j]]]
            out.append(acc)
    return MatrixGFq(field, A.rows, B.cols, tuple(out))


def mat_vec(L: MatrixGFq, v: Sequence[int]) -> Tuple[int, ...]:
    """Column-vector action L·v."""
    if L.cols != len(v):
        raise DimensionMismatch(f"cannot apply {L.rows}x{L.cols} map to length-{len(v)} vector")
    add, mul = L.field.add_table, L.field.mul_table
    out = []
    for i in range(L.rows):
        acc = 0
        for a, x in zip(L.row(i), v):
            acc = add[acc][mul[a][x]]
        out.append(acc)
    return tuple(out)


def transpose(M: MatrixGFq) -> MatrixGFq:
    return MatrixGFq.from_rows(M.field, [[M[i, j] for i in range(M.rows)] for j in range(M.cols)], M.rows)


def invert(M: MatrixGFq) -> MatrixGFq:
    """Gauss-Jordan inverse via rref of [M | I]."""
    n = M.rows
    if M.cols != n:
        raise DimensionMismatch("only square matrices are invertible")
    augmented = [list(M.row(i)) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    reduced, pivots = rref_rows(M.field, augmented, 2 * n)
    if pivots[:n] != list(range(n)):
        raise SingularMap(f"{n}x{n} matrix is singular")
    return MatrixGFq.from_rows(M.field, [row[n:] for row in reduced], n)


def random_invertible(field: FieldSpec, n: int, seed: int) -> MatrixGFq:
    """Deterministic element of GL(n, q) drawn by rejection sampling."""
    if n < 1:
        raise DimensionMismatch("n must be at least 1")
    rng = random.Random(seed)
    while True:
        rows = [[rng.randrange(field.q) for _ in range(n)] for _ in range(n)]
        _, pivots = rref_rows(field, rows, n)
        if len(pivots) == n:
            return MatrixGFq.from_rows(field, rows, n)


def random_matrix(field: FieldSpec, rows: int, cols: int, seed: int) -> MatrixGFq:
    rng = random.Random(seed)
    return MatrixGFq.from_rows(field, [[rng.randrange(field.q) for _ in range(cols)] for _ in range(rows)], cols)
