"""Worker pool for independent per-frequency work.

Every frequency is solved independently and written to its own slot, so
results do not depend on the number of workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_threads = 1


def resolve_threads(n: int | None) -> int:
    """0 means one worker per CPU; None falls back to VISCOWAVE_THREADS, then 1."""
    if n is None:
        env = os.environ.get("VISCOWAVE_THREADS")
        n = int(env) if env else 1
    if n < 0:
        raise ValueError("thread count must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def set_threads(n: int | None) -> int:
    global _threads
    _threads = resolve_threads(n)
    return _threads


def get_threads() -> int:
    return _threads


def map_ordered(func, items):
    """list(map(func, items)), spread over the configured workers."""
    items = list(items)
    if _threads <= 1 or len(items) < 2:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=_threads) as ex:
        return list(ex.map(func, items))
