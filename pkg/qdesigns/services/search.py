"""
Search for small simple t-(n,k,lambda) designs over F_q.

The design condition is an exact multi-cover: choose distinct k-subspaces so
that every t-subspace is covered exactly lambda times. The exhaustive method
is Algorithm X with covering multiplicities, most-constrained element first;
the greedy method trades completeness for reach.
"""

import random
import time
from dataclasses import dataclass, field as dataclass_field
from typing import List, Optional, Sequence, Tuple, Union

from qdesigns.config import settings
from qdesigns.error_handling import (
    DimensionMismatch,
    InvariantViolation,
    SearchTimeout,
    ensure_within_cap,
    require,
)
from qdesigns.logging_config import get_logger
from qdesigns.services.gf_core import FieldSpec, make_field
from qdesigns.services.grassmann import SubspaceBasis, enumerate_subspaces, index_by_key, subspaces_within
from qdesigns.services.qcount import q_binomial
from qdesigns.services.verifier import DesignCandidate, Infeasible, block_count_for, verify_design
from qdesigns.workers.shard_pool import map_chunked

logger = get_logger("search")

METHODS = ("exhaustive", "greedy")
DEADLINE_CHECK_EVERY = 256


@dataclass(frozen=True)
class NotFound:
    """No design was produced; for the exhaustive method this proves nonexistence."""
    reason: str
    nodes: int = 0


@dataclass(frozen=True)
class CoverInstance:
    universe: Tuple[SubspaceBasis, ...]
    candidates: Tuple[SubspaceBasis, ...]
    covers: Tuple[Tuple[int, ...], ...]
    lam: int

    @property
    def containing(self) -> List[List[int]]:
        by_element: List[List[int]] = [[] for _ in self.universe]
        for c, cover in enumerate(self.covers):
            for e in cover:
                by_element[e].append(c)
        return by_element


def build_cover_instance(n: int, k: int, t: int, field: FieldSpec, lam: int, workers: int = None) -> CoverInstance:
    universe = enumerate_subspaces(n, t, field, workers)
    candidates = enumerate_subspaces(n, k, field, workers)
    position = index_by_key(universe)

    def cover_chunk(chunk: Sequence[SubspaceBasis]) -> List[Tuple[int, ...]]:
        return [tuple(sorted(position[S] for S in subspaces_within(U, t))) for U in chunk]

    covers = tuple(c for part in map_chunked(cover_chunk, candidates, workers) for c in part)
    width = q_binomial(k, t, field.q)
    require(all(len(c) == width for c in covers), f"a candidate does not cover [{k} {t}]_{field.q} elements")
    return CoverInstance(tuple(universe), tuple(candidates), covers, lam)


@dataclass
class _Frame:
    options: List[int]
    position: int = 0
    current: Optional[int] = None
    excluded: List[int] = dataclass_field(default_factory=list)


class MultiCoverSolver:
    """Exact cover where every element must be hit exactly `lam` times by
    distinct candidates.

    State is kept in counters and undone in reverse order: `remaining[e]` is
    the coverage still owed to e, `blocked[c]` counts the reasons candidate c
    is unusable (a saturated element, or exclusion by an earlier sibling) and
    `avail[e]` counts usable candidates containing e.
    """

    def __init__(self, instance: CoverInstance, deadline: Optional[float] = None):
        self.instance = instance
        self.covers = instance.covers
        self.containing = instance.containing
        self.deadline = deadline
        self.remaining = [instance.lam] * len(instance.universe)
        self.blocked = [0] * len(instance.candidates)
        self.chosen = [False] * len(instance.candidates)
        self.avail = [len(cs) for cs in self.containing]
        self.selection: List[int] = []
        self.saturated = 0
        self.best_saturated = 0
        self.nodes = 0
        self.started = time.monotonic()

    def _block(self, c: int) -> None:
        self.blocked[c] += 1
        if self.blocked[c] == 1 and not self.chosen[c]:
            for e in self.covers[c]:
                self.avail[e] -= 1

    def _unblock(self, c: int) -> None:
        self.blocked[c] -= 1
        if self.blocked[c] == 0 and not self.chosen[c]:
            for e in self.covers[c]:
                self.avail[e] += 1

    def _select(self, c: int) -> None:
        self.chosen[c] = True
        self.selection.append(c)
        if not self.blocked[c]:
            for e in self.covers[c]:
                self.avail[e] -= 1
        for e in self.covers[c]:
            self.remaining[e] -= 1
            if self.remaining[e] == 0:
                self.saturated += 1
                for other in self.containing[e]:
                    self._block(other)
        self.best_saturated = max(self.best_saturated, self.saturated)

    def _unselect(self, c: int) -> None:
        for e in reversed(self.covers[c]):
            if self.remaining[e] == 0:
                for other in reversed(self.containing[e]):
                    self._unblock(other)
                self.saturated -= 1
            self.remaining[e] += 1
        if not self.blocked[c]:
            for e in self.covers[c]:
                self.avail[e] += 1
        self.chosen[c] = False
        self.selection.pop()

    def _tick(self) -> None:
        self.nodes += 1
        if self.deadline is not None and self.nodes % DEADLINE_CHECK_EVERY == 0:
            if time.monotonic() > self.deadline:
                raise SearchTimeout(
                    elapsed_seconds=time.monotonic() - self.started,
                    nodes=self.nodes,
                    best_covered=self.best_saturated,
                    universe_size=len(self.remaining),
                )

    def _open_frame(self) -> Optional[_Frame]:
        """Branch on the unsaturated element with the fewest usable candidates;
        None when some element can no longer reach its multiplicity."""
        best = None
        for e, owed in enumerate(self.remaining):
            if owed == 0:
                continue
            if self.avail[e] < owed:
                return None
            if best is None or self.avail[e] < self.avail[best]:
                best = e
        options = [c for c in self.containing[best] if not self.blocked[c] and not self.chosen[c]]
        return _Frame(options)

    def _solved(self) -> bool:
        return self.saturated == len(self.remaining)

    def solve(self) -> Optional[List[int]]:
        """Candidate indices of the first solution in branch order, or None."""
        if self._solved():
            return []
        root = self._open_frame()
        if root is None:
            return None
        stack = [root]
        while stack:
            frame = stack[-1]
            if frame.current is not None:
                # Child exhausted: later siblings must not reuse this choice.
                self._unselect(frame.current)
                self._block(frame.current)
                frame.excluded.append(frame.current)
                frame.current = None
            descended = False
            while frame.position < len(frame.options):
                c = frame.options[frame.position]
                frame.position += 1
                if self.blocked[c] or self.chosen[c]:
                    continue
                self._tick()
                self._select(c)
                if self._solved():
                    return sorted(self.selection)
                child = self._open_frame()
                if child is not None:
                    frame.current = c
                    stack.append(child)
                    descended = True
                    break
                self._unselect(c)
                self._block(c)
                frame.excluded.append(c)
            if descended:
                continue
            for c in reversed(frame.excluded):
                self._unblock(c)
            stack.pop()
        return None


def greedy_cover(instance: CoverInstance, N: int, seed: int, restarts: int,
                 deadline: Optional[float] = None) -> Tuple[Optional[List[int]], int]:
    """Repeatedly add the unused candidate with the least over-coverage,
    breaking ties at random; returns (solution or None, steps taken)."""
    covers = instance.covers
    started = time.monotonic()
    steps = 0
    best_saturated = 0
    for restart in range(restarts):
        rng = random.Random(seed * 1_000_003 + restart)
        remaining = [instance.lam] * len(instance.universe)
        used = [False] * len(instance.candidates)
        chosen: List[int] = []
        while len(chosen) < N:
            steps += 1
            if deadline is not None and steps % DEADLINE_CHECK_EVERY == 0 and time.monotonic() > deadline:
                raise SearchTimeout(
                    elapsed_seconds=time.monotonic() - started,
                    nodes=steps,
                    best_covered=best_saturated,
                    universe_size=len(remaining),
                )
            best_cost = None
            ties: List[int] = []
            for c, cover in enumerate(covers):
                if used[c]:
                    continue
                cost = sum(1 for e in cover if remaining[e] <= 0)
                if best_cost is None or cost < best_cost:
                    best_cost, ties = cost, [c]
                elif cost == best_cost:
                    ties.append(c)
            if not ties:
                break
            c = rng.choice(ties)
            used[c] = True
            chosen.append(c)
            for e in covers[c]:
                remaining[e] -= 1
        best_saturated = max(best_saturated, sum(1 for r in remaining if r == 0))
        if all(r == 0 for r in remaining):
            logger.info("greedy_solution", restart=restart, steps=steps)
            return sorted(chosen), steps
    return None, steps


def search_design(q: int, n: int, k: int, t: int, lam: int, method: str = "exhaustive", seed: int = 0,
                  limit: Optional[float] = None, workers: int = None) -> Union[DesignCandidate, NotFound]:
    """Find a simple t-(n,k,lam) design over F_q, or report NotFound.

    Raises SearchTimeout once `limit` seconds have passed.
    """
    if method not in METHODS:
        raise DimensionMismatch(f"method must be one of {', '.join(METHODS)}, got {method!r}")
    if not 0 <= t <= k <= n:
        raise DimensionMismatch(f"need t <= k <= n, got n={n}, k={k}, t={t}")
    field = make_field(q)

    N = block_count_for(n, k, t, q, lam)
    if isinstance(N, Infeasible):
        logger.info("search_infeasible", reason=N.reason)
        return NotFound(N.reason)
    if N > q_binomial(n, k, q):
        return NotFound(f"a simple design needs at most [{n} {k}]_{q} blocks, lambda={lam} needs {N}")

    if method == "exhaustive":
        ensure_within_cap(f"[{n} {t}]_{q} universe", q_binomial(n, t, q), settings.MAX_SEARCH_COLUMNS)
        ensure_within_cap(f"[{n} {k}]_{q} candidates", q_binomial(n, k, q), settings.MAX_SEARCH_CANDIDATES)

    limit = settings.SEARCH_TIMEOUT_SECONDS if limit is None else limit
    deadline = time.monotonic() + limit if limit > 0 else None
    instance = build_cover_instance(n, k, t, field, lam, workers)

    with logger.track_performance("search_design", method=method, q=q, n=n, k=k, t=t, lam=lam, N=N):
        if method == "exhaustive":
            solver = MultiCoverSolver(instance, deadline)
            solution = solver.solve()
            nodes = solver.nodes
        else:
            solution, nodes = greedy_cover(instance, N, seed, settings.GREEDY_RESTARTS, deadline)

    if solution is None:
        if method == "exhaustive":
            return NotFound(f"no simple {t}-({n},{k},{lam}) design over F_{q} exists", nodes)
        return NotFound(f"greedy found nothing in {settings.GREEDY_RESTARTS} restarts", nodes)

    design = DesignCandidate(field, n, k, tuple(instance.candidates[c] for c in solution))
    report = verify_design(design, t, workers)
    if not (report.is_design and report.lambda_ == lam and report.is_simple):
        raise InvariantViolation(f"search returned a block set that is not a simple {t}-({n},{k},{lam}) design")
    logger.info("design_found", method=method, blocks=design.size, nodes=nodes)
    return design
