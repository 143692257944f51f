"""Small helper for running independent work items on a thread pool."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def map_chunks(func: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """Apply ``func`` to every item and return results in input order.

    Runs serially when ``workers <= 1`` or there is at most one item; otherwise
    dispatches to a ``ThreadPoolExecutor``. Output order never depends on
    scheduling, so results are deterministic either way.
    """
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def split_evenly(n_items: int, n_chunks: int) -> List[range]:
    """Partition ``range(n_items)`` into at most ``n_chunks`` contiguous ranges."""
    n_chunks = max(1, min(n_chunks, n_items)) if n_items else 1
    bounds = [round(i * n_items / n_chunks) for i in range(n_chunks + 1)]
    return [range(bounds[i], bounds[i + 1]) for i in range(n_chunks) if bounds[i + 1] > bounds[i]]
