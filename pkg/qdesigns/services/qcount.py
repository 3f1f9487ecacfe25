"""
Exact q-combinatorics: q-integers, q-factorials and Gaussian binomials.

All values are Python integers; nothing here ever rounds.
"""

from functools import lru_cache
from itertools import combinations
from math import comb

from qdesigns.config import settings
from qdesigns.error_handling import DimensionMismatch, InvariantViolation, TooManyTerms, ensure_within_cap
from qdesigns.models import BoundsCheck


def q_integer(i: int, q: int) -> int:
    """[i]_q = 1 + q + ... + q^(i-1)."""
    return (q ** i - 1) // (q - 1) if i > 0 else 0


@lru_cache(maxsize=None)
def q_factorial(n: int, q: int) -> int:
    if n < 0:
        raise DimensionMismatch(f"q_factorial needs n >= 0, got n={n}")
    result = 1
    for i in range(1, n + 1):
        result *= q_integer(i, q)
    return result


@lru_cache(maxsize=None)
def q_binomial(n: int, k: int, q: int) -> int:
    """Number of k-subspaces of F_q^n; zero outside 0 <= k <= n.

    Uses the running product prod (q^(n-i) - 1)/(q^(i+1) - 1); each partial
    product is itself a Gaussian binomial, so every division is exact.
    """
    if k < 0 or n < 0 or k > n:
        return 0
    k = min(k, n - k)
    value = 1
    for i in range(k):
        numerator = value * (q ** (n - i) - 1)
        denominator = q ** (i + 1) - 1
        value, remainder = divmod(numerator, denominator)
        if remainder:
            raise InvariantViolation(f"inexact division computing [{n} {k}]_{q} at step {i}")
    return value


def q_binomial_via_factorials(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    value, remainder = divmod(q_factorial(n, q), q_factorial(k, q) * q_factorial(n - k, q))
    if remainder:
        raise InvariantViolation(f"[{n}]_{q}! not divisible by [{k}]_{q}![{n - k}]_{q}!")
    return value


def q_binomial_via_sum(n: int, k: int, q: int) -> int:
    """Sum of q^((s_1+...+s_k) - k(k+1)/2) over 1 <= s_1 < ... < s_k <= n."""
    if k < 0 or k > n:
        raise DimensionMismatch(f"need 0 <= k <= n, got n={n}, k={k}")
    ensure_within_cap(f"C({n},{k}) terms", comb(n, k), settings.MAX_SUM_TERMS, TooManyTerms)
    offset = k * (k + 1) // 2
    return sum(q ** (sum(s) - offset) for s in combinations(range(1, n + 1), k))


def check_bounds(n: int, k: int, q: int) -> BoundsCheck:
    """q^(k(n-k)) <= [n k]_q <= C(n,k) q^(k(n-k))."""
    if k < 0 or k > n:
        raise DimensionMismatch(f"need 0 <= k <= n, got n={n}, k={k}")
    lower = q ** (k * (n - k))
    upper = comb(n, k) * lower
    value = q_binomial(n, k, q)
    return BoundsCheck(n=n, k=k, q=q, lower=lower, value=value, upper=upper, ok=lower <= value <= upper)


def pascal_check(n: int, k: int, q: int) -> bool:
    """[n k]_q = [n-1 k-1]_q + q^k [n-1 k]_q for n >= 1."""
    return q_binomial(n, k, q) == q_binomial(n - 1, k - 1, q) + q ** k * q_binomial(n - 1, k, q)


def gl_order(n: int, q: int) -> int:
    """|GL(n, q)| = prod (q^n - q^i)."""
    order = 1
    for i in range(n):
        order *= q ** n - q ** i
    return order
