"""Ordered fan-out over independent work items."""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "HELLINGER_KIT_THREADS"


def worker_count():
    raw = os.environ.get(ENV_THREADS)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def ordered_map(func, items):
    """``[func(x) for x in items]``, possibly on a thread pool; order is kept."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
