"""
Shard execution for enumeration and verification work.

Results always come back in shard order, so any reduction over them is
independent of the worker count.

Threads suit the shards that mostly build big-integer bitsets. Pure-Python
counting loops hold the interpreter lock, so those go to `map_processes`
instead.
"""

import multiprocessing
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

from qdesigns.config import get_workers
from qdesigns.logging_config import get_logger

logger = get_logger("shard_pool")

S = TypeVar("S")
R = TypeVar("R")


def split_evenly(items: Sequence[S], parts: int) -> List[Sequence[S]]:
    """Split items into at most `parts` contiguous, order-preserving chunks."""
    parts = max(1, min(parts, len(items)))
    size, extra = divmod(len(items), parts)
    chunks = []
    start = 0
    for i in range(parts):
        end = start + size + (1 if i < extra else 0)
        chunks.append(items[start:end])
        start = end
    return chunks


def map_shards(func: Callable[[S], R], shards: Iterable[S], workers: int = None) -> List[R]:
    """Apply func to every shard, returning results in shard order."""
    shards = list(shards)
    workers = get_workers(workers)
    if workers <= 1 or len(shards) <= 1:
        return [func(shard) for shard in shards]

    logger.debug("map_shards", shards=len(shards), workers=workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, shards))


def map_processes(func: Callable[[S], R], shards: Iterable[S], workers: int = None) -> List[R]:
    """Like map_shards, but on worker processes.

    func must be a module-level function; shards and results must pickle.
    Workers are spawned, so they start from a fresh import and see only
    what the shard carries.
    """
    shards = list(shards)
    workers = get_workers(workers)
    if workers <= 1 or len(shards) <= 1:
        return [func(shard) for shard in shards]

    logger.debug("map_processes", shards=len(shards), workers=workers)
    context = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=min(workers, len(shards)), mp_context=context) as executor:
        return list(executor.map(func, shards))


def map_chunked(func: Callable[[Sequence[S]], R], items: Sequence[S], workers: int = None) -> List[R]:
    """Split items into one chunk per worker and map func over the chunks."""
    workers = get_workers(workers)
    if not items:
        return []
    return map_shards(func, split_evenly(items, workers), workers)
