import os
from concurrent.futures import ThreadPoolExecutor


def max_workers() -> int:
    """Thread cap from ``MAXDIV_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("MAXDIV_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """``list(map(fn, items))``, threaded when allowed; output order is input order."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
