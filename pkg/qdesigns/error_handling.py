"""
Error types, resource guards and invariant-suite execution for qdesigns.

Every exception raised by the library derives from QDesignsError and carries
the process exit code the CLI reports for it: 1 for mathematical failures,
2 for usage errors, 3 for resource caps and timeouts.
"""

import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import psutil

from qdesigns.config import settings
from qdesigns.logging_config import error_tracker, get_logger

logger = get_logger("error_handling")

EXIT_OK = 0
EXIT_MATH_FAILURE = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


class QDesignsError(Exception):
    """Base error; subclasses set the CLI exit code."""
    exit_code = EXIT_MATH_FAILURE


class UsageError(QDesignsError):
    exit_code = EXIT_USAGE


class UnsupportedOrder(UsageError):
    """Field order outside the built-in table."""


class AmbientMismatch(UsageError):
    """Operands live in different fields or ambient dimensions."""


class DimensionMismatch(UsageError):
    """A subspace or matrix has the wrong dimension for the operation."""


class SingularMap(UsageError):
    """A linear map expected to be invertible is singular."""


class DesignFormatError(UsageError):
    """A design file could not be parsed."""


class TooLarge(QDesignsError):
    """A computation would exceed a configured resource cap."""
    exit_code = EXIT_RESOURCE

    def __init__(self, what: str, value: int, cap: int):
        self.what = what
        self.value = value
        self.cap = cap
        super().__init__(f"{what} = {value} exceeds cap {cap}")


class TooManyTerms(TooLarge):
    """The explicit sum identity has too many terms to expand."""


class SearchTimeout(QDesignsError):
    """Design search ran out of time; carries the best partial coverage."""
    exit_code = EXIT_RESOURCE

    def __init__(self, elapsed_seconds: float, nodes: int, best_covered: int, universe_size: int):
        self.elapsed_seconds = elapsed_seconds
        self.nodes = nodes
        self.best_covered = best_covered
        self.universe_size = universe_size
        super().__init__(
            f"search timed out after {elapsed_seconds:.1f}s; "
            f"best partial coverage {best_covered}/{universe_size} after {nodes} nodes"
        )

    def stats(self) -> Dict[str, Any]:
        return {
            "nodes": self.nodes,
            "best_covered": self.best_covered,
            "universe_size": self.universe_size,
        }


class InvariantViolation(QDesignsError):
    """An identity that must hold exactly did not."""


class DegenerateSystem(InvariantViolation):
    """The decode matrix has a zero on its diagonal."""


def ensure_within_cap(what: str, value: int, cap: int, error: type = TooLarge) -> None:
    """Raise TooLarge (or the given subclass) when value exceeds cap."""
    if value > cap:
        logger.warning("resource_cap_exceeded", what=what, value=value, cap=cap)
        raise error(what, value, cap)


def ensure_memory_for(what: str, required_bytes: int) -> None:
    """Refuse allocations larger than the configured share of available memory."""
    available = psutil.virtual_memory().available
    budget = int(available * settings.MEMORY_HEADROOM)
    if required_bytes > budget:
        logger.warning(
            "memory_budget_exceeded",
            what=what,
            required_bytes=required_bytes,
            budget_bytes=budget,
        )
        raise TooLarge(f"{what} bytes", required_bytes, budget)


def require(condition: bool, message: str, error: type = InvariantViolation) -> None:
    """Raise when an exact identity fails."""
    if not condition:
        raise error(message)


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    cases: int
    detail: str = ""
    duration_ms: float = 0.0


class InvariantSuite:
    """Run named invariant checks, isolating failures per check.

    A check is a callable returning the number of cases it examined; it
    signals failure by raising.
    """

    def __init__(self):
        self.checks: List[Tuple[str, Callable[[], int]]] = []

    def add_check(self, name: str, check_func: Callable[[], int]):
        self.checks.append((name, check_func))

    def names(self) -> List[str]:
        return [name for name, _ in self.checks]

    def run_checks(self, only: Optional[List[str]] = None) -> List[CheckOutcome]:
        outcomes: List[CheckOutcome] = []
        for name, check_func in self.checks:
            if only and name not in only:
                continue
            start = time.perf_counter()
            try:
                cases = int(check_func())
                outcome = CheckOutcome(name=name, passed=True, cases=cases)
            except Exception as e:
                error_tracker.track_error(e, {"check": name})
                outcome = CheckOutcome(name=name, passed=False, cases=0, detail=str(e) or type(e).__name__)
            outcome.duration_ms = round((time.perf_counter() - start) * 1000, 2)
            logger.info(
                "invariant_check",
                check=name,
                passed=outcome.passed,
                cases=outcome.cases,
                duration_ms=outcome.duration_ms,
            )
            outcomes.append(outcome)
        return outcomes
