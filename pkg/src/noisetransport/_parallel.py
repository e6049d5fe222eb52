"""Order-preserving process-pool map used by the Monte Carlo drivers."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "NOISETRANSPORT_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(func: Callable[[T], R], items: Sequence[T], workers: int | None = None) -> list[R]:
    """``[func(x) for x in items]``, farmed out to ``workers`` processes when > 1."""
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) < 2:
        return [func(x) for x in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunk))


def chunked(seq: Sequence[T], n_chunks: int) -> list[Sequence[T]]:
    n_chunks = max(1, min(n_chunks, len(seq)))
    size = -(-len(seq) // n_chunks)
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def flatten(parts: Iterable[list[R]]) -> list[R]:
    return [x for part in parts for x in part]
