"""Tiny deterministic worker pool.

Results are always returned in input order, never completion order, so the
worker count (capped by the ``SOFTCOVER_THREADS`` environment variable) has
no effect on any output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    env = os.environ.get("SOFTCOVER_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"SOFTCOVER_THREADS must be an integer, got {env!r}")
    return min(4, os.cpu_count() or 1)


def map_indexed(fn, items) -> list:
    items = list(items)
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
