"""
Invariant suites behind `qdesigns selftest`.

Each check returns the number of cases it examined and raises on the first
failure. Case counts depend only on the grids, never on the worker count,
so reports are byte-identical across --workers settings.
"""

from functools import partial
from math import comb
from typing import Callable, List, Optional, Tuple

from qdesigns.error_handling import InvariantSuite, UsageError, require
from qdesigns.logging_config import get_logger
from qdesigns.models import SelftestReport, SuiteResult
from qdesigns.services.gf_core import (
    SUPPORTED_ORDERS,
    MatrixGFq,
    check_field_axioms,
    identity,
    make_field,
    random_invertible,
    random_matrix,
    reduce_vector,
    rref,
    rref_rows,
)
from qdesigns.services.grassmann import (
    apply_map,
    contains,
    enumerate_subspaces,
    extensions,
    intersect_dim,
    map_between,
    mask_dim,
    stacked_rank,
)
from qdesigns.services.incidence import build_incidence, summarize
from qdesigns.services.klp import check_matrix_properties, divisibility_witness, klp_report
from qdesigns.services.localdecode import (
    c3_bound,
    check_cond2,
    check_det_bounds,
    decode_certificate,
    lemma2_grid_check,
    solve_coefficients,
    verify_certificate,
)
from qdesigns.services.qcount import (
    check_bounds,
    pascal_check,
    q_binomial,
    q_binomial_via_factorials,
    q_binomial_via_sum,
)
from qdesigns.services.search import NotFound, search_design
from qdesigns.services.verifier import (
    DesignCandidate,
    Infeasible,
    lambda_identity_check,
    transform_design,
    trivial_design,
    union_designs,
    verify_design,
)

logger = get_logger("selftest")

ENUMERATION_GRID = {2: 6, 3: 5, 4: 4, 5: 4}
INCIDENCE_TRIPLES = ((3, 2, 1), (4, 2, 1), (5, 3, 2))
INCIDENCE_BIT_LIMIT = 10 ** 7
MAX_SUM_TERMS = 10 ** 6


# ============================================================================
# FIELDS AND MATRICES
# ============================================================================

def check_fields(workers: int) -> int:
    return sum(check_field_axioms(make_field(q)) for q in SUPPORTED_ORDERS)


def check_rref(workers: int) -> int:
    cases = 0
    for q in (2, 3, 4, 5):
        field = make_field(q)
        for shape in ((3, 5), (4, 4), (2, 6), (5, 3)):
            for seed in range(20):
                M = random_matrix(field, shape[0], shape[1], seed)
                R, r = rref(M)
                require(rref(R)[0] == R, f"rref not idempotent over F_{q}, seed {seed}")
                reduced, pivots = rref_rows(field, M.to_rows(), M.cols)
                basis = reduced[:r]
                for row in M.to_rows():
                    require(not any(reduce_vector(field, basis, pivots, row)), "row of M outside rref span")
                stacked = MatrixGFq.from_rows(field, M.to_rows() + R.to_rows()[:r], M.cols)
                require(rref(stacked)[1] == r, "rref rows outside the row space of M")
                cases += 1
        for n in range(1, 6):
            L = random_invertible(field, n, seed=n)
            R, r = rref(L)
            require(r == n and R == identity(field, n),
                    f"random invertible {n}x{n} over F_{q} does not reduce to I")
            cases += 1
    return cases


# ============================================================================
# COUNTING
# ============================================================================

def check_qbinom_symmetry(workers: int) -> int:
    cases = 0
    for q in (2, 3, 4, 5):
        for n in range(13):
            for k in range(n + 1):
                require(q_binomial(n, k, q) == q_binomial(n, n - k, q), f"[{n} {k}]_{q} not symmetric")
                cases += 1
    return cases


def check_qbinom_enumeration(workers: int) -> int:
    cases = 0
    for q, top in ENUMERATION_GRID.items():
        field = make_field(q)
        for n in range(top + 1):
            for k in range(n + 1):
                subspaces = enumerate_subspaces(n, k, field, workers)
                require(len(subspaces) == q_binomial(n, k, q), f"|Gr({k},{n})| over F_{q} != [{n} {k}]_{q}")
                keys = [V.sort_key for V in subspaces]
                require(all(a < b for a, b in zip(keys, keys[1:])), f"Gr({k},{n}) over F_{q} not strictly ordered")
                cases += 1
    return cases


def check_qbinom_bounds(workers: int) -> int:
    cases = 0
    for q in (2, 3, 4, 5):
        for n in range(13):
            for k in range(n + 1):
                require(check_bounds(n, k, q).ok, f"bounds fail at [{n} {k}]_{q}")
                cases += 1
    return cases


def check_qbinom_identities(workers: int) -> int:
    cases = 0
    for q in (2, 3, 4, 5):
        for n in range(13):
            for k in range(n + 1):
                value = q_binomial(n, k, q)
                require(q_binomial_via_factorials(n, k, q) == value, f"factorial route disagrees at [{n} {k}]_{q}")
                if comb(n, k) <= MAX_SUM_TERMS:
                    require(q_binomial_via_sum(n, k, q) == value, f"sum identity disagrees at [{n} {k}]_{q}")
                if n >= 1:
                    require(pascal_check(n, k, q), f"Pascal recurrence fails at [{n} {k}]_{q}")
                cases += 1
    return cases


# ============================================================================
# SUBSPACES
# ============================================================================

def check_extensions(workers: int) -> int:
    cases = 0
    for q in (2, 3):
        field = make_field(q)
        for n in range(1, 6):
            for t in range(n + 1):
                for V in enumerate_subspaces(n, t, field, workers):
                    for k in range(t, n + 1):
                        over = extensions(V, k)
                        require(len(over) == q_binomial(n - t, k - t, q),
                                f"|extensions| != [{n - t} {k - t}]_{q} for {V}")
                        require(len(set(over)) == len(over), "duplicate extension")
                        if q == 2:
                            require(all(contains(U, V) for U in over), "extension does not contain V")
                        cases += 1
    return cases


def check_intersections(workers: int) -> int:
    cases = 0
    for q, n in ((2, 4), (3, 3)):
        field = make_field(q)
        everything = [V for k in range(n + 1) for V in enumerate_subspaces(n, k, field, workers)]
        for U in everything:
            for V in everything:
                d = intersect_dim(U, V)
                require(d + stacked_rank(U, V) == U.k + V.k, "dimension formula fails")
                require(d == mask_dim(U.span_mask & V.span_mask, q), "intersection disagrees with vector sets")
                cases += 1
    return cases


def check_gl_action(workers: int) -> int:
    cases = 0
    for q, top in ((2, 4), (3, 3)):
        field = make_field(q)
        for n in range(1, top + 1):
            for k in range(n + 1):
                subspaces = enumerate_subspaces(n, k, field, workers)
                for seed in range(3):
                    L = random_invertible(field, n, seed)
                    images = [apply_map(L, V, check=False) for V in subspaces]
                    require(set(images) == set(subspaces) and len(set(images)) == len(images),
                            f"GL({n},{q}) does not permute Gr({k},{n})")
                    cases += 1
                if q == 2:
                    for U1, U2 in zip(subspaces, reversed(subspaces)):
                        require(apply_map(map_between(U1, U2), U1) == U2, "map_between misses its target")
                        cases += 1
    return cases


# ============================================================================
# INCIDENCE AND DESIGNS
# ============================================================================

def check_incidence(workers: int) -> int:
    field = make_field(2)
    cases = 0
    for n, k, t in INCIDENCE_TRIPLES:
        M = build_incidence(n, k, t, field, workers)
        summary = summarize(M, symmetry_trials=20, seed=n * 100 + k * 10 + t)
        require(summary.c2 == 1, f"c2 != 1 for ({n},{k},{t})")
        require(summary.constant_vector and summary.double_counting, f"weights fail for ({n},{k},{t})")
        require(summary.symmetry_ok is True, f"GL symmetry fails for ({n},{k},{t})")
        require(check_matrix_properties(M, trials=5).passed, f"matrix properties fail for ({n},{k},{t})")
        cases += 1
    return cases


def check_incidence_weights(workers: int) -> int:
    cases = 0
    for q, top in ((2, 7), (3, 6)):
        field = make_field(q)
        for n in range(1, top + 1):
            for k in range(1, n + 1):
                for t in range(1, k + 1):
                    if q_binomial(n, k, q) * q_binomial(n, t, q) > INCIDENCE_BIT_LIMIT:
                        continue
                    M = build_incidence(n, k, t, field, workers)
                    require(set(M.row_sums()) == {q_binomial(k, t, q)}, f"row weights fail at ({q},{n},{k},{t})")
                    require(set(M.col_sums()) == {q_binomial(n - t, k - t, q)}, f"column weights fail at ({q},{n},{k},{t})")
                    cases += 1
    return cases


def _spread_f2_4(workers: int) -> DesignCandidate:
    spread = search_design(2, 4, 2, 1, 1, limit=0, workers=workers)
    require(isinstance(spread, DesignCandidate), "no spread of F_2^4 found")
    return spread


def check_verifier(workers: int) -> int:
    cases = 0
    for q in (2, 3):
        field = make_field(q)
        for n in range(1, 6):
            for k in range(1, n + 1):
                design = trivial_design(n, k, field, workers)
                for t in range(k + 1):
                    report = verify_design(design, t, workers)
                    require(report.is_design and report.lambda_ == q_binomial(n - t, k - t, q),
                            f"trivial design over F_{q}^{n}, k={k}, t={t} has wrong lambda")
                    require(report.is_trivial and report.is_simple, "trivial design not flagged trivial")
                    cases += 1

    field = make_field(2)
    trivial = trivial_design(4, 2, field, workers)
    require(verify_design(trivial, 1, workers).lambda_ == 7 and 7 * 15 == 35 * 3, "trivial 1-(4,2) design is not lambda=7")
    dropped = DesignCandidate(field, 4, 2, trivial.blocks[1:])
    report = verify_design(dropped, 1, workers)
    require(not report.is_design and report.counts_histogram == {6: 3, 7: 12},
            f"drop-one histogram {report.counts_histogram}")
    cases += 2

    spread = _spread_f2_4(workers)
    complement = DesignCandidate(field, 4, 2, tuple(B for B in trivial.blocks if B not in set(spread.blocks)))
    require(verify_design(complement, 1, workers).lambda_ == 6, "spread complement is not lambda=6")
    joined = verify_design(union_designs(spread, complement), 1, workers)
    require(joined.is_design and joined.lambda_ == 7 and joined.is_simple, "spread + complement is not lambda=7")
    cases += 2
    for seed in range(5):
        moved = verify_design(transform_design(spread, random_invertible(field, 4, seed)), 1, workers)
        require(moved.is_design and moved.lambda_ == 1 and moved.is_simple, "GL image of a spread is not a spread")
        cases += 1
    return cases


# ============================================================================
# LOCAL DECODING
# ============================================================================

def check_decode_systems(workers: int) -> int:
    cases = 0
    for q in (2, 3):
        for t in (1, 2, 3):
            for k in range(t + 1, t + 5):
                system = solve_coefficients(q, t, k)
                require(check_cond2(q, t, k), f"vanishing rows fail at ({q},{t},{k})")
                require(system.f[t] * q_binomial(k, k - t, q) == system.m, f"f(t) identity fails at ({q},{t},{k})")
                cases += 1
    worked = solve_coefficients(2, 1, 2)
    require(worked.D == [[2, 1], [0, 3]] and worked.m == 6 and worked.f == [-1, 2], "worked (2,1,2) system drifted")
    return cases + 1


def check_certificates(workers: int) -> int:
    cases = 0
    for q, t, k, n in ((2, 1, 2, 3), (2, 1, 2, 4), (2, 2, 3, 5)):
        columns = enumerate_subspaces(n, t, make_field(q), workers)
        for V in (columns[0], columns[len(columns) // 2], columns[-1]):
            verdict = verify_certificate(decode_certificate(V, k), workers)
            require(verdict.ok, f"certificate for {V} with k={k} fails ({verdict.mismatches} mismatches)")
            cases += 1
    return cases


def check_lemma2_grid(workers: int) -> int:
    cases = 0
    grid = [(2, n, t, k) for n in range(2, 7) for t in (1, 2) for k in range(t, min(4, n) + 1) if t < n]
    grid += [(3, n, t, k) for n in range(2, 5) for t in range(1, n) for k in range(t, n + 1)]
    for q, n, t, k in grid:
        report = lemma2_grid_check(q, n, t, k, workers)
        require(report.ok, f"intersection count fails at q={q}, n={n}, t={t}, k={k}")
        cases += report.cases_checked
    return cases


def check_det_bound_grid(workers: int) -> int:
    cases = 0
    for q in (2, 3):
        for t in range(1, 5):
            for k in range(t, 9):
                require(check_det_bounds(q, t, k).passed, f"determinant bounds fail at ({q},{t},{k})")
                cases += 1
    return cases


def check_c3(workers: int) -> int:
    cases = 0
    for q in (2, 3):
        for t in (1, 2):
            for k in range(t + 1, t + 3):
                report = c3_bound(q, t, k)
                require(report.ok is True, f"c3 check fails at ({q},{t},{k})")
                cases += 1
    return cases


# ============================================================================
# EXISTENCE BOUND AND SEARCH
# ============================================================================

def check_klp(workers: int) -> int:
    require(klp_report(2, 1000, 25, 1).feasible, "(2,1000,25,1) should be feasible")
    require(not klp_report(2, 1000, 12, 1).feasible, "(2,1000,12,1) should not be feasible")
    cases = 2
    for q in (2, 3):
        for t in (1, 2):
            for k in range(t, 6):
                for n in range(k, 11):
                    report = klp_report(q, n, k, t)
                    require(report.c2 == 1, "c2 != 1")
                    require(divisibility_witness(q, n, k, t) <= report.c1_bound,
                            f"witness above c1 bound at ({q},{n},{k},{t})")
                    cases += 1
    values = [klp_report(2, 40, 5, 1, constant=c).rhs_final for c in range(1, 5)]
    require(values == sorted(values), "rhs_final decreases with the constant")
    return cases + 1


def check_search(workers: int) -> int:
    spread = _spread_f2_4(workers)
    report = verify_design(spread, 1, workers)
    require(spread.size == 5 and report.is_simple and not report.is_trivial, "F_2^4 spread is wrong")

    big = search_design(2, 6, 3, 1, 1, limit=0, workers=workers)
    require(isinstance(big, DesignCandidate) and big.size == 9, "no 9-block spread of F_2^6")
    report = verify_design(big, 1, workers)
    require(report.is_design and report.lambda_ == 1 and report.is_simple and not report.is_trivial,
            "F_2^6 spread does not verify")

    require(isinstance(search_design(2, 3, 2, 1, 1, limit=0, workers=workers), NotFound),
            "1-(3,2,1) over F_2 should not exist")
    require(isinstance(lambda_identity_check(5, 2, 1, 2, 10), Infeasible), "10 blocks cannot form a 1-(5,2) design")
    require(isinstance(search_design(2, 5, 2, 1, 1, limit=0, workers=workers), NotFound),
            "1-(5,2,1) over F_2 is infeasible")
    return 5


SUITES: List[Tuple[str, Callable[[int], int]]] = [
    ("field_axioms", check_fields),
    ("rref_properties", check_rref),
    ("qbinom_symmetry", check_qbinom_symmetry),
    ("qbinom_enumeration", check_qbinom_enumeration),
    ("qbinom_bounds", check_qbinom_bounds),
    ("qbinom_identities", check_qbinom_identities),
    ("extensions", check_extensions),
    ("intersection_dimension", check_intersections),
    ("gl_action", check_gl_action),
    ("incidence_properties", check_incidence),
    ("incidence_weights", check_incidence_weights),
    ("verifier", check_verifier),
    ("decode_system", check_decode_systems),
    ("certificates", check_certificates),
    ("intersection_counts", check_lemma2_grid),
    ("det_bounds", check_det_bound_grid),
    ("c3", check_c3),
    ("klp", check_klp),
    ("search", check_search),
]


def build_suite(workers: int = None) -> InvariantSuite:
    suite = InvariantSuite()
    for name, func in SUITES:
        suite.add_check(name, partial(func, workers))
    return suite


def run_selftest(workers: int = None, only: Optional[List[str]] = None) -> SelftestReport:
    """Run the suites (all of them, or those named in `only`)."""
    suite = build_suite(workers)
    if only:
        unknown = sorted(set(only) - set(suite.names()))
        if unknown:
            raise UsageError(f"unknown suite(s): {', '.join(unknown)}; choose from {', '.join(suite.names())}")
    with logger.track_performance("selftest", workers=workers, only=only):
        outcomes = suite.run_checks(only)
    results = [SuiteResult(name=o.name, passed=o.passed, cases=o.cases, detail=o.detail) for o in outcomes]
    return SelftestReport(passed=all(r.passed for r in results), suites=results)
