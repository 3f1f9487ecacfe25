"""
Exact evaluation of the existence-bound parameters for the t-vs-k
incidence matrix, and direct checks of its five matrix properties on small
instances.

Fractional powers are rounded up with integer n-th roots, so every
comparison is between Python integers.
"""

from fractions import Fraction

from sympy import integer_nthroot

from qdesigns.error_handling import DimensionMismatch, TooLarge, UsageError, require
from qdesigns.logging_config import get_logger
from qdesigns.models import KLPReport, MatrixPropertiesReport
from qdesigns.services.incidence import (
    IncidenceStructure,
    boundedness,
    check_constant_vector_property,
    check_symmetry_transitivity,
)
from qdesigns.services.localdecode import decode_certificate, solve_coefficients, verify_certificate
from qdesigns.services.qcount import q_binomial

logger = get_logger("klp")

EXACT_LIMIT_N = 64
LOG_READING = "bit_length(A_upper * c2) ** 8"
FEASIBILITY_NOTE = "relative to supplied constant"


def ceil_fractional_power(x: int, num: int, den: int) -> int:
    """Smallest integer >= x^(num/den), for x >= 0."""
    if x < 0 or num < 0 or den < 1:
        raise ValueError("ceil_fractional_power needs x >= 0, num >= 0, den >= 1")
    root, exact = integer_nthroot(x ** num, den)
    return int(root) if exact else int(root) + 1


def klp_report(q: int, n: int, k: int, t: int, constant: int = 1) -> KLPReport:
    if not 1 <= t <= k <= n:
        raise DimensionMismatch(f"need 1 <= t <= k <= n, got n={n}, k={k}, t={t}")
    if constant < 1:
        raise UsageError("constant must be at least 1")

    c1_bound = q ** (k * (t + 1) ** 2 + t * (n - t) + n)
    c2 = 1
    c3_bound = q ** (2 * k * (t + 1) ** 2)
    A_upper = q ** (t * (n - t) + n)
    B_lower = q ** (k * (n - k))

    with logger.track_performance("klp_report", q=q, n=n, k=k, t=t):
        rhs_final = (
            constant
            * ceil_fractional_power(A_upper, 52, 5)
            * c1_bound
            * ceil_fractional_power(c2 * c3_bound, 12, 5)
            * (A_upper * c2).bit_length() ** 8
        )

    block_budget = q ** (12 * (t + 1) * n)
    report = KLPReport(
        q=q, n=n, k=k, t=t,
        constant=constant,
        c1_bound=c1_bound,
        c2=c2,
        c3_bound=c3_bound,
        A_upper=A_upper,
        B_lower=B_lower,
        rhs_final=rhs_final,
        feasible=rhs_final < B_lower,
        block_budget=block_budget,
        threshold_k_gt_12t=k > 12 * t,
        threshold_k_gt_12_t_plus_1=k > 12 * (t + 1),
        log_reading=LOG_READING,
        feasibility_note=FEASIBILITY_NOTE,
    )
    if n <= EXACT_LIMIT_N:
        report.A_exact = q_binomial(n, t, q)
        report.B_exact = q_binomial(n, k, q)
        require(report.A_exact <= A_upper, f"[{n} {t}]_{q} exceeds its upper bound")
        require(report.B_exact >= B_lower, f"[{n} {k}]_{q} is below its lower bound")
        report.budget_below_B = block_budget < report.B_exact
    return report


def divisibility_witness(q: int, n: int, k: int, t: int) -> int:
    """m [n t]_q, a multiple of the divisibility parameter.

    The average row is ([k t]_q / [n t]_q) times all-ones, so the witness
    times it is m [k t]_q times all-ones, which local decodability reaches.
    """
    if not 1 <= t <= k <= n:
        raise DimensionMismatch(f"need 1 <= t <= k <= n, got n={n}, k={k}, t={t}")
    if n > EXACT_LIMIT_N:
        raise UsageError(f"divisibility witness is only evaluated for n <= {EXACT_LIMIT_N}")
    m = solve_coefficients(q, t, k).m
    witness = m * q_binomial(n, t, q)
    scaled_average = Fraction(witness * q_binomial(k, t, q), q_binomial(n, t, q))
    require(scaled_average.denominator == 1, "witness times the average row is not integral")
    require(scaled_average == m * q_binomial(k, t, q), "scaled average row != m [k t]_q")
    return witness


def check_matrix_properties(M: IncidenceStructure, trials: int = 20, seed: int = 0) -> MatrixPropertiesReport:
    """Constant vector, divisibility, boundedness, local decodability and
    symmetry, each checked on the materialized matrix."""
    q, n, k, t = M.field.q, M.n, M.k, M.t
    witness = divisibility_witness(q, n, k, t)
    c2 = boundedness(M)

    decodes = None
    if n >= t + k:
        first_column = M.col_index[0]
        try:
            decodes = verify_certificate(decode_certificate(first_column, k)).ok
        except TooLarge as e:
            logger.warning("local_decodability_skipped", reason=str(e))
    symmetric = check_symmetry_transitivity(M, trials, seed)
    constant = check_constant_vector_property(M)

    passed = constant and c2 == 1 and symmetric and decodes is not False
    return MatrixPropertiesReport(
        q=q, n=n, k=k, t=t,
        constant_vector=constant,
        divisibility_witness=witness,
        witness_below_rows=witness < len(M.row_index),
        boundedness=c2,
        local_decodability=decodes,
        symmetry=symmetric,
        passed=passed,
    )
