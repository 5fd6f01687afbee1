"""Deterministic chunked mapping over a worker pool.

Results are returned in input order regardless of worker count, so any
reduction downstream sees the same values in the same order whether the
run used one worker or many.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def chunked_map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    """Apply ``fn`` to every item, chunking across ``workers`` threads."""
    n = len(items)
    if workers <= 1 or n < 256:
        return [fn(x) for x in items]
    chunk_size = max(64, -(-n // (workers * 4)))
    chunks = [items[i : i + chunk_size] for i in range(0, n, chunk_size)]

    def run_chunk(chunk: Sequence[T]) -> list[R]:
        return [fn(x) for x in chunk]

    out: list[R] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(run_chunk, chunks):
            out.extend(part)
    return out
